"""Exterior algebra on R^8 with the Cayley calibration four-form.

Forms are stored as coefficients on strictly increasing multi-indices over
{0..7}.  Two arithmetic modes are supported and never mixed inside one form:
exact (fractions.Fraction / int) for all constant-coefficient algebra, and
float for sampled field computations.

Conventions
-----------
* Coordinates 0..3 span the first R^4 factor ("base"), 4..7 the second
  ("fiber").  The orientation is e^{01234567}.
* The standard self-dual triple on a 4-dimensional factor is
  w1 = e01 + e23, w2 = e02 - e13, w3 = e03 + e12 (indices shifted by the
  factor offset).
* The Cayley form ``phi0`` is vol_base + vol_fiber - sum_i w_i ^ m_i where
  (w_i) and (m_i) are the standard triples on the two factors.  Written out
  it has 14 terms with coefficients +-1 and satisfies phi ^ phi = 14 vol and
  *phi = phi.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "KForm8",
    "Spin7Structure",
    "TwoFormOperator",
    "basis_form",
    "wedge",
    "hodge_star",
    "phi0",
    "standard_g2_form",
    "standard_hyperkahler_triples",
    "hyperkahler_pair_form",
    "g2_line_form",
    "two_form_operator",
    "two_form_operator_metric",
    "proj7",
    "proj21",
    "proj7_matrix",
    "lambda2_7_basis",
    "complex_structure",
    "gamma_project",
    "TWO_FORM_INDEX",
]

COORDS = tuple(range(8))

#: canonical ordering of the 28 two-form basis elements e^{ij}, i < j
TWO_FORM_INDEX = tuple((i, j) for i in range(8) for j in range(i + 1, 8))
_PAIR_POS = {p: n for n, p in enumerate(TWO_FORM_INDEX)}


def _sort_index(idx):
    """Sort a multi-index by bubble sort, tracking parity.

    Returns (sorted_tuple, sign); sign is 0 if an index repeats.
    """
    idx = list(idx)
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
            elif idx[j] == idx[j + 1]:
                return None, 0
    return tuple(idx), sign


class ModeMixError(TypeError):
    """Raised when exact and float forms meet in one operation."""


@dataclass(frozen=True)
class KForm8:
    """Alternating k-form on R^8 with canonical multi-index coefficients."""

    degree: int
    coeffs: dict
    exact: bool = True

    def __post_init__(self):
        clean = {}
        for idx, c in self.coeffs.items():
            if len(idx) != self.degree:
                raise ValueError(f"index {idx} has length != degree {self.degree}")
            if any(i not in COORDS for i in idx):
                raise ValueError(f"index {idx} out of range 0..7")
            if list(idx) != sorted(idx):
                raise ValueError(f"index {idx} is not strictly increasing")
            if c != 0:
                if self.exact:
                    clean[tuple(idx)] = Fraction(c)
                else:
                    clean[tuple(idx)] = complex(c) if isinstance(c, complex) else float(c)
        object.__setattr__(self, "coeffs", clean)

    def coefficient(self, idx):
        return self.coeffs.get(tuple(idx), Fraction(0) if self.exact else 0.0)

    def __add__(self, other):
        self._check_mode(other)
        if self.degree != other.degree:
            raise ValueError("cannot add forms of different degree")
        out = dict(self.coeffs)
        for idx, c in other.coeffs.items():
            out[idx] = out.get(idx, 0) + c
        return KForm8(self.degree, out, exact=self.exact)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, s):
        return KForm8(self.degree, {k: v * s for k, v in self.coeffs.items()}, exact=self.exact)

    def _check_mode(self, other):
        if self.exact != other.exact:
            raise ModeMixError("exact-mode and float-mode forms never mix")

    def to_float(self):
        return KForm8(self.degree, {k: float(v) for k, v in self.coeffs.items()}, exact=False)

    def norm_sq(self):
        """Euclidean norm squared in the orthonormal e^I basis."""
        return sum(c * c for c in self.coeffs.values())

    def is_zero(self, tol=0.0):
        return all(abs(c) <= tol for c in self.coeffs.values())

    def to_json_dict(self):
        """Serialize as {degree, terms: [{idx, num, den}]}; exact mode only."""
        if not self.exact:
            raise ModeMixError("JSON schema stores exact rationals; convert first")
        terms = [
            {"idx": list(idx), "num": c.numerator, "den": c.denominator}
            for idx, c in sorted(self.coeffs.items())
        ]
        return {"degree": self.degree, "terms": terms}

    def to_json(self):
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, d):
        coeffs = {
            tuple(t["idx"]): Fraction(t["num"], t["den"]) for t in d["terms"]
        }
        return cls(d["degree"], coeffs, exact=True)

    @classmethod
    def from_json(cls, s):
        return cls.from_json_dict(json.loads(s))

    def as_two_form_vector(self, dtype=float):
        """Coefficient vector of a 2-form in the canonical 28-element basis."""
        if self.degree != 2:
            raise ValueError("vector representation is for 2-forms")
        if dtype is object:
            v = np.zeros(28, dtype=object)
            v[:] = Fraction(0)
        else:
            v = np.zeros(28, dtype=dtype)
        for idx, c in self.coeffs.items():
            v[_PAIR_POS[idx]] = c if dtype is object else float(c)
        return v

    @classmethod
    def from_two_form_vector(cls, v, exact=False, tol=0.0):
        coeffs = {}
        for n, pair in enumerate(TWO_FORM_INDEX):
            c = v[n]
            if exact:
                coeffs[pair] = Fraction(c)
            elif abs(c) > tol:
                coeffs[pair] = float(c)
        return cls(2, coeffs, exact=exact)


def basis_form(*idx, coeff=1, exact=True):
    """The basis form coeff * e^{idx}; indices must be strictly increasing."""
    return KForm8(len(idx), {tuple(idx): coeff}, exact=exact)


def zero_form(degree, exact=True):
    return KForm8(degree, {}, exact=exact)


def wedge(a: KForm8, b: KForm8) -> KForm8:
    """Alternating product with the sign of the merging permutation."""
    a._check_mode(b)
    if a.degree + b.degree > 8:
        raise ValueError("wedge degree exceeds 8")
    out = {}
    for ia, ca in a.coeffs.items():
        for ib, cb in b.coeffs.items():
            idx, s = _sort_index(ia + ib)
            if s:
                out[idx] = out.get(idx, 0) + s * ca * cb
    return KForm8(a.degree + b.degree, out, exact=a.exact)


def hodge_star(a: KForm8, universe=COORDS) -> KForm8:
    """Euclidean Hodge star: *(e^I) = sign * e^{I^c} with e^I ^ *e^I = vol.

    ``universe`` selects the ambient coordinate set (all eight by default;
    the seven-dimensional star on 1..7 is used by the G2 x line model).
    """
    out = {}
    for idx, c in a.coeffs.items():
        comp = tuple(i for i in universe if i not in idx)
        _, s = _sort_index(idx + comp)
        out[comp] = out.get(comp, 0) + s * c
    return KForm8(len(universe) - a.degree, out, exact=a.exact)


# ---------------------------------------------------------------------------
# model constructions of the Cayley form


def standard_hyperkahler_triples():
    """Standard self-dual triples (w_i on coords 0..3, m_i on coords 4..7).

    They satisfy w_i ^ w_j = 2 delta_ij vol and likewise for m_i.
    """
    def triple(o):
        return (
            basis_form(o + 0, o + 1) + basis_form(o + 2, o + 3),
            basis_form(o + 0, o + 2) - basis_form(o + 1, o + 3),
            basis_form(o + 0, o + 3) + basis_form(o + 1, o + 2),
        )

    return triple(0), triple(4)


def phi0() -> KForm8:
    """The Cayley four-form on R^8 = R^4 x R^4 (14 terms, coefficients +-1)."""
    omegas, mus = standard_hyperkahler_triples()
    out = basis_form(0, 1, 2, 3) + basis_form(4, 5, 6, 7)
    for w, m in zip(omegas, mus):
        out = out - wedge(w, m)
    return out


def standard_g2_form() -> KForm8:
    """The associative three-form on coordinates 1..7 (seven terms).

    dt ^ phi + *_7 phi with this phi reproduces ``phi0`` coefficient for
    coefficient.
    """
    terms = {
        (1, 2, 3): 1,
        (1, 4, 5): -1,
        (1, 6, 7): -1,
        (2, 4, 6): -1,
        (2, 5, 7): 1,
        (3, 4, 7): -1,
        (3, 5, 6): -1,
    }
    return KForm8(3, terms, exact=True)


@dataclass(frozen=True)
class TwoFormOperator:
    """The operator alpha -> *(alpha ^ Phi) on Lambda^2 in the e^{ij} basis."""

    matrix: np.ndarray  # 28x28; dtype object (exact ints/Fractions) or float

    @property
    def exact(self):
        return self.matrix.dtype == object

    def is_symmetric(self):
        m, mt = self.matrix, self.matrix.T
        if self.exact:
            return bool(np.all(m == mt))
        return np.allclose(m, mt)

    def __call__(self, v):
        return self.matrix @ v


def two_form_operator(phi: KForm8) -> TwoFormOperator:
    """Matrix of alpha -> *(alpha ^ phi) in the canonical 2-form basis."""
    if phi.degree != 4:
        raise ValueError("phi must be a 4-form")
    dtype = object if phi.exact else float
    mat = np.zeros((28, 28), dtype=dtype)
    if phi.exact:
        mat[:] = Fraction(0)
    for col, pair in enumerate(TWO_FORM_INDEX):
        image = hodge_star(wedge(basis_form(*pair, exact=phi.exact), phi))
        for idx, c in image.coeffs.items():
            mat[_PAIR_POS[idx], col] = c
    return TwoFormOperator(mat)


def _lambda2_gram(ginv):
    """Gram matrix of the metric inner product on Lambda^2 from inverse metric."""
    g28 = np.zeros((28, 28), dtype=complex if np.iscomplexobj(ginv) else float)
    for a, (i, j) in enumerate(TWO_FORM_INDEX):
        for b, (k, l) in enumerate(TWO_FORM_INDEX):
            g28[a, b] = ginv[i, k] * ginv[j, l] - ginv[i, l] * ginv[j, k]
    return g28


def two_form_operator_metric(phi: KForm8, g: np.ndarray) -> TwoFormOperator:
    """alpha -> *_g(alpha ^ phi) for a general (float) metric g.

    Uses the pairing alpha' ^ (alpha ^ phi) = <alpha', T alpha>_g vol_g, so
    T = G2^{-1} V / sqrt(det g) where V is the exact wedge pairing matrix.
    Accepts complex-valued g/phi to support complex-step differentiation.
    """
    cplx = np.iscomplexobj(g) or any(
        isinstance(c, complex) for c in phi.coeffs.values()
    )
    dt = complex if cplx else float
    V = np.zeros((28, 28), dtype=dt)
    for col, pair in enumerate(TWO_FORM_INDEX):
        # coefficients of e^{row} ^ e^{col} ^ phi on the volume form
        for row, rpair in enumerate(TWO_FORM_INDEX):
            idx, s = _sort_index(rpair + pair)
            if not s:
                continue
            comp = tuple(i for i in COORDS if i not in idx)
            if len(comp) != 4:
                continue
            _, s2 = _sort_index(idx + comp)
            c = phi.coeffs.get(comp)
            if c is not None:
                V[row, col] += s * s2 * (complex(c) if cplx else float(c))
    ginv = np.linalg.inv(g)
    g28 = _lambda2_gram(ginv)
    sdet = np.sqrt(np.linalg.det(g))
    mat = np.linalg.solve(g28, V) / sdet
    return TwoFormOperator(mat)


# ---------------------------------------------------------------------------
# Spin(7)-structures and validation


@dataclass(frozen=True)
class Spin7Structure:
    """An admissible four-form together with its Lambda^2 projector data."""

    phi: KForm8
    provenance: str  # "standard" | "hyperkahler-pair" | "g2-line"
    validated: bool
    heuristic: bool = False  # True when admissibility was only eigen-checked
    _matrix: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def operator(self) -> TwoFormOperator:
        return TwoFormOperator(self._matrix)

    def proj7_matrix(self) -> np.ndarray:
        """Float 28x28 matrix of the projection onto the eigenvalue-3 space."""
        m = self._matrix
        if m.dtype == object:
            m = m.astype(float)
        return (m + np.eye(28)) / 4.0

    @classmethod
    def standard(cls):
        return make_structure(phi0(), "standard")


class ValidationError(ValueError):
    """A candidate four-form failed the admissibility eigen-signature test."""


def _validate_exact(phi, T):
    eye = np.zeros((28, 28), dtype=object)
    eye[:] = Fraction(0)
    for i in range(28):
        eye[i, i] = Fraction(1)
    m = T.matrix
    if not np.all((m - 3 * eye) @ (m + eye) == 0):
        return False, "minimal polynomial (T-3)(T+1) != 0"
    if sum(m[i, i] for i in range(28)) != 0:
        return False, "trace(T) != 0 so multiplicities are not 7/21"
    if not T.is_symmetric():
        return False, "operator not symmetric"
    ww = wedge(phi, phi)
    if ww.coeffs != {COORDS: Fraction(14)}:
        return False, "phi ^ phi != 14 vol"
    if hodge_star(phi).coeffs != phi.coeffs:
        return False, "*phi != phi"
    return True, ""


def _validate_float(phi, T, tol):
    ev = np.linalg.eigvalsh(T.matrix.astype(float))
    n3 = int(np.sum(np.abs(ev - 3) < tol))
    n1 = int(np.sum(np.abs(ev + 1) < tol))
    if (n3, n1) != (7, 21):
        return False, f"eigen signature {{3:{n3}, -1:{n1}}} != {{3:7, -1:21}}"
    ww = wedge(phi, phi)
    if abs(ww.coefficient(COORDS) - 14) > tol:
        return False, "phi ^ phi != 14 vol"
    if not (hodge_star(phi) - phi).is_zero(tol):
        return False, "*phi != phi"
    return True, ""


def make_structure(phi: KForm8, provenance: str, heuristic=False, tol=1e-9) -> Spin7Structure:
    """Validate a candidate four-form and wrap it as a Spin7Structure.

    Exact-mode forms are validated exactly: the operator T = *(. ^ phi) must
    be symmetric with (T-3)(T+1) = 0 and tr T = 0, which forces eigenvalues
    3 and -1 with multiplicities 7 and 21; additionally phi ^ phi = 14 vol
    and *phi = phi.  Float forms are checked to ``tol``.
    """
    T = two_form_operator(phi)
    ok, why = _validate_exact(phi, T) if phi.exact else _validate_float(phi, T, tol)
    if not ok:
        raise ValidationError(why)
    return Spin7Structure(phi, provenance, validated=True, heuristic=heuristic, _matrix=T.matrix)


def hyperkahler_pair_form(omegas, mus) -> Spin7Structure:
    """vol_S + vol_T - sum_i omega_i ^ mu_i from two hyperkahler triples.

    Requires omega_i ^ omega_j = 2 delta_ij vol_S on the first factor and the
    analogous condition for mu_i on the second factor.
    """
    vol_s = basis_form(0, 1, 2, 3, exact=omegas[0].exact)
    vol_t = basis_form(4, 5, 6, 7, exact=mus[0].exact)
    for triple, vol, name in ((omegas, vol_s, "omega"), (mus, vol_t, "mu")):
        for i in range(3):
            for j in range(3):
                w = wedge(triple[i], triple[j])
                want = vol.scale(2) if i == j else zero_form(4, triple[i].exact)
                diff = w - want
                if not diff.is_zero(0 if triple[i].exact else 1e-12):
                    raise ValidationError(
                        f"{name}-triple is not orthonormal: {name}{i+1} ^ {name}{j+1}"
                    )
    phi = vol_s + vol_t
    for w, m in zip(omegas, mus):
        phi = phi - wedge(w, m)
    return make_structure(phi, "hyperkahler-pair")


def g2_line_form(phi3: KForm8) -> Spin7Structure:
    """dt ^ phi + *_7 phi for a constant-coefficient three-form on coords 1..7."""
    if phi3.degree != 3 or any(0 in idx for idx in phi3.coeffs):
        raise ValidationError("phi3 must be a degree-3 form on coordinates 1..7")
    psi = hodge_star(phi3, universe=tuple(range(1, 8)))
    phi = wedge(basis_form(0, exact=phi3.exact), phi3) + psi
    return make_structure(phi, "g2-line")


# ---------------------------------------------------------------------------
# projections


def proj7(alpha: KForm8, s: Spin7Structure) -> KForm8:
    """(T + 1)/4 applied to a two-form; image is the 7-dimensional eigenspace."""
    if not s.validated:
        raise ValueError("structure is not validated")
    if alpha.exact and s.phi.exact:
        v = alpha.as_two_form_vector(dtype=object)
        out = (s._matrix @ v + v) / 4
        return KForm8.from_two_form_vector(out, exact=True)
    v = alpha.to_float().as_two_form_vector() if alpha.exact else alpha.as_two_form_vector()
    return KForm8.from_two_form_vector(s.proj7_matrix() @ v, exact=False)


def proj21(alpha: KForm8, s: Spin7Structure) -> KForm8:
    """Complementary projection onto the eigenvalue -1 space."""
    a = alpha.to_float() if (alpha.exact and not s.phi.exact) else alpha
    return a - proj7(a, s)


def proj7_matrix(s: Spin7Structure = None) -> np.ndarray:
    """Float projector matrix for the standard structure (or a given one)."""
    if s is None:
        s = Spin7Structure.standard()
    return s.proj7_matrix()


def lambda2_7_basis(s: Spin7Structure = None) -> np.ndarray:
    """Orthonormal basis of Lambda^2_7 as a (7, 28) float matrix.

    Rows 0..2 span Lambda^2_3 = <w_i - m_i>/2; rows 3..6 span Lambda^2_4
    (mixed forms in the image of ``gamma_project``).
    """
    if s is None:
        s = Spin7Structure.standard()
    omegas, mus = standard_hyperkahler_triples()
    rows = []
    for w, m in zip(omegas, mus):
        rows.append((w - m).scale(Fraction(1, 2)).to_float().as_two_form_vector())
    # the gamma image is the right-multiplications x -> x q; seed with q = 1,i,j,k
    for unit in np.eye(4):
        L = np.stack([_qmul_vec(em, unit) for em in np.eye(4)], axis=-1)
        G = gamma_project(L)
        if np.linalg.norm(G - L) > 1e-12:
            raise AssertionError("right multiplication not fixed by gamma")
        v = np.zeros(28)
        for a in range(4):
            for b in range(4):
                v[_PAIR_POS[(a, 4 + b)]] = G[a, b]
        rows.append(v / np.linalg.norm(v))
    B = np.array(rows)
    # the seven rows are orthonormal by construction; fail loudly if not
    if not np.allclose(B @ B.T, np.eye(7), atol=1e-12):
        raise AssertionError("Lambda^2_7 basis failed orthonormality")
    return B


# ---------------------------------------------------------------------------
# the Hom(TQ, NQ) projector gamma


def _qmul_vec(a, b):
    """Quaternion product of two length-4 vectors (local copy, avoids a cycle)."""
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return np.array(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ]
    )


def complex_structure(form2: KForm8, offset=0) -> np.ndarray:
    """Skew matrix J with (J v)_a = sum_b c_{ab} v_b from a 2-form's coefficients."""
    J = np.zeros((4, 4))
    for (i, j), c in form2.coeffs.items():
        J[i - offset, j - offset] = float(c)
        J[j - offset, i - offset] = -float(c)
    return J


_STANDARD_I = None
_STANDARD_J = None


def _standard_triples_matrices():
    global _STANDARD_I, _STANDARD_J
    if _STANDARD_I is None:
        omegas, mus = standard_hyperkahler_triples()
        _STANDARD_I = [complex_structure(w) for w in omegas]
        _STANDARD_J = [complex_structure(m, offset=4) for m in mus]
    return _STANDARD_I, _STANDARD_J


def gamma_project(L: np.ndarray, source_triple=None, target_triple=None) -> np.ndarray:
    """(1/4)(L - sum_i J_i L I_i): projection of Hom(TQ, NQ) onto the
    4-dimensional subspace where sum_i J_i L I_i = -3 L.

    I_i act on the source factor, J_i on the target factor; defaults are the
    standard triples.  Under the dictionary L -> sum_{ab} L[a,b] e^a ^ e^{4+b}
    this projector agrees with ``proj7`` restricted to mixed two-forms.
    """
    I_mats, J_mats = _standard_triples_matrices()
    if source_triple is not None:
        I_mats = source_triple
    if target_triple is not None:
        J_mats = target_triple
    out = np.array(L, dtype=np.asarray(L).dtype, copy=True)
    for Ji, Ii in zip(J_mats, I_mats):
        out = out - Ji @ np.asarray(L) @ Ii
    return out / 4
