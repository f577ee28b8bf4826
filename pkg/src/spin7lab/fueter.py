"""Flat quaternionic Dirac operator on T^4 and the component-wise
Spin(7)-instanton characterization on R^4 x R^4.

Sections of Re(S+ (x) E_inf) at charge one are pairs of quaternions on a
periodic grid (flat torus of side 2 pi).  One quaternionic triple is used
throughout: I_m = complex_structure(w_m), the standard self-dual complex
structures (left multiplication by -e_m).  The chiral Dirac operators are

    D+ = d_0 + I_1 d_1 + I_2 d_2 + I_3 d_3
    D- = d_0 - I_1 d_1 - I_2 d_2 - I_3 d_3

applied componentwise; a field carries a chirality tag so that applying the
operator twice composes D- D+ = D+ D- = the flat Laplacian.  The Clifford
multiplication gamma is (1/4)(L - sum_i J_i L I_i) with the fiber action
J_i given by the same triple, which makes gamma idempotent and makes
evaluating gamma(grad s) on e_0 recover (1/4) D+ s.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import quaternions as qt
from .asd4 import sd_coefficients
from .exterior8 import (
    Spin7Structure,
    TWO_FORM_INDEX,
    complex_structure,
    gamma_project,
    standard_hyperkahler_triples,
)

__all__ = [
    "QuaternionField",
    "HomPhiField",
    "dirac_apply",
    "fueter_apply",
    "dirac_kernel_linear",
    "dirac_kernel_dimension",
    "InstantonComponentReport",
    "componentwise_instanton_check",
]

SIDE = 2 * np.pi


def _canonical_triple():
    omegas, _ = standard_hyperkahler_triples()
    return [complex_structure(w) for w in omegas]


_TRIPLE = _canonical_triple()


@dataclass(frozen=True)
class QuaternionField:
    """Pair-of-quaternion samples on the periodic 4-grid, with chirality."""

    values: np.ndarray  # (n, n, n, n, 2, 4)
    chirality: str = "+"

    def __post_init__(self):
        if self.values.ndim != 6 or self.values.shape[-2:] != (2, 4):
            raise ValueError("values must have shape (n, n, n, n, 2, 4)")
        if self.chirality not in ("+", "-"):
            raise ValueError("chirality must be '+' or '-'")

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def spacing(self):
        return SIDE / self.n

    def sup_norm(self):
        return float(np.abs(self.values).max())

    @classmethod
    def from_function(cls, fn, n, chirality="+"):
        """Sample fn(x) -> (..., 2, 4) on the n^4 periodic grid."""
        x = grid_coordinates(n)
        return cls(np.asarray(fn(x), float), chirality)


def grid_coordinates(n):
    """Coordinates of the n^4 periodic grid: shape (n, n, n, n, 4)."""
    c = np.arange(n) * (SIDE / n)
    g = np.stack(np.meshgrid(c, c, c, c, indexing="ij"), axis=-1)
    return g


def _diff4_periodic(values, axis, h):
    """4th-order central difference along a periodic axis."""
    r = np.roll
    return (
        8 * (r(values, -1, axis) - r(values, 1, axis))
        - (r(values, -2, axis) + (-1) * r(values, 2, axis))
    ) / (12 * h)


def dirac_apply(s: QuaternionField) -> QuaternionField:
    """Apply the chiral Dirac operator, flipping the chirality tag.

    On '+' fields this is D+ = d_0 + sum_m I_m d_m, on '-' fields the
    conjugated D-; hence dirac_apply(dirac_apply(s)) is the flat Laplacian
    of s (Weitzenboeck on the flat torus).
    """
    h = s.spacing
    sign = 1.0 if s.chirality == "+" else -1.0
    out = _diff4_periodic(s.values, 0, h)
    for m in range(1, 4):
        d = _diff4_periodic(s.values, m, h)
        out = out + sign * np.einsum("pq,...q->...p", _TRIPLE[m - 1], d)
    return QuaternionField(out, "-" if s.chirality == "+" else "+")


def laplacian(s: QuaternionField) -> QuaternionField:
    """Flat Laplacian by direct second differences (independent stencil)."""
    h = s.spacing
    out = np.zeros_like(s.values)
    for m in range(4):
        r = np.roll
        out += (
            -r(s.values, -2, m)
            + 16 * r(s.values, -1, m)
            - 30 * s.values
            + 16 * r(s.values, 1, m)
            - r(s.values, 2, m)
        ) / (12 * h**2)
    return QuaternionField(out, s.chirality)


def dirac_kernel_linear(constants, n):
    """A linear section in ker D+: s(x) = sum_m (x_m - x_0 I_m) c_m.

    ``constants`` is an array (3, 4) of quaternions (c_1, c_2, c_3); the
    section is built from the flat Dirac kernel symbols x_m - x_0 I_m and is
    annihilated by D+ exactly (up to the wrap rows of the periodic grid).
    """
    constants = np.asarray(constants, float)

    def fn(x):
        out = np.zeros(x.shape[:-1] + (2, 4))
        for p in range(2):
            for m in range(1, 4):
                c = constants[m - 1]
                Ic = _TRIPLE[m - 1] @ c
                out[..., p, :] += x[..., m, None] * c - x[..., 0, None] * Ic
        return out

    return QuaternionField.from_function(fn, n)


def dirac_kernel_dimension(max_k=2):
    """Real dimension of ker D+ over Fourier modes with |k|_inf <= max_k.

    The symbol at mode k is i (k_0 + sum_m k_m I_m) on each quaternion
    component; it is invertible unless k = 0, so only the constants
    survive: 4 real dimensions per quaternion component, 8 for the pair.
    """
    dim = 0
    rng = range(-max_k, max_k + 1)
    for k in itertools.product(rng, rng, rng, rng):
        sym = k[0] * np.eye(4)
        for m in range(1, 4):
            sym = sym + k[m] * _TRIPLE[m - 1]
        dim += 4 - np.linalg.matrix_rank(sym, tol=1e-10)
    return int(2 * dim)  # two quaternion components per section


@dataclass(frozen=True)
class HomPhiField:
    """Samples of Hom_Phi(TQ, fiber)-valued data: gamma-projected gradients."""

    values: np.ndarray  # (n, n, n, n, 2, 4, 4): [pair, fiber quaternion, base]

    def sup_norm(self):
        return float(np.abs(self.values).max())

    def evaluate_on_e0(self):
        """Contract with e_0; returns (n, n, n, n, 2, 4) quaternion samples."""
        return self.values[..., 0]

    def gamma_residual(self):
        """Distance of the samples from the image of gamma (should be ~0)."""
        g = _apply_gamma(self.values)
        return float(np.abs(g - self.values).max())


def _apply_gamma(L):
    out = np.array(L, copy=True)
    for Ii in _TRIPLE:
        out = out - np.einsum("pq,...qb,bc->...pc", Ii, L, Ii)
    return out / 4.0


def fueter_apply(s: QuaternionField) -> HomPhiField:
    """gamma(grad s) for the flat fiber connection.

    Vanishes exactly when s satisfies the Fueter (Dirac) equation; the e_0
    evaluation recovers (1/4) dirac_apply(s).
    """
    h = s.spacing
    grads = np.stack([_diff4_periodic(s.values, m, h) for m in range(4)], axis=-1)
    return HomPhiField(_apply_gamma(grads))


# ---------------------------------------------------------------------------
# the component-wise characterization on R^4 x R^4


def _fd8_connection(A, x, h):
    d = []
    for m in range(8):
        xp, xm = x.copy(), x.copy()
        xp2, xm2 = x.copy(), x.copy()
        xp[..., m] += h
        xm[..., m] -= h
        xp2[..., m] += 2 * h
        xm2[..., m] -= 2 * h
        d.append((8 * (A(xp) - A(xm)) - (A(xp2) - A(xm2))) / (12 * h))
    return d


def curvature8(A, x, fd_step=1e-3):
    """Curvature of an 8-dimensional connection sampler at points (..., 8)."""
    x = np.asarray(x, float)
    d = _fd8_connection(A, x, fd_step)
    Av = A(x)
    F = np.zeros(x.shape[:-1] + (8, 8, 4))
    for m in range(8):
        for n in range(m + 1, 8):
            val = d[m][..., n, :] - d[n][..., m, :] + qt.bracket(Av[..., m, :], Av[..., n, :])
            F[..., m, n, :] = val
            F[..., n, m, :] = -val
    return F


@dataclass(frozen=True)
class InstantonComponentReport:
    residual_sd_pair: float      # ||(F^{2,0})+ - (F^{0,2})+||_sup
    residual_fueter_block: float  # ||gamma(F^{1,1})||_sup
    residual_proj7: float         # ||pi_7(F)||_sup
    consistency_residual: float   # |pi7|^2 vs component identity, pointwise

    def is_instanton(self, tol=1e-8):
        return self.residual_proj7 < tol


def componentwise_instanton_check(A, s: Spin7Structure = None, points=None,
                                  fd_step=1e-3, rng=0) -> InstantonComponentReport:
    """Check pi_7(F) = 0 against the two component conditions.

    The three reported residuals vanish together: pointwise,
    |pi_7 F|^2 = |(F20)+ - (F02)+|^2 + ||gamma(F11)||_F^2, which is also
    asserted as the consistency residual.
    """
    if s is None:
        s = Spin7Structure.standard()
    if points is None:
        gen = np.random.default_rng(rng)
        points = gen.standard_normal((200, 8))
    F = curvature8(A, points, fd_step)
    F20 = F[..., :4, :4, :]
    F02 = F[..., 4:, 4:, :]
    F11 = F[..., :4, 4:, :]  # L[a, b] with a base, b fiber

    sd20 = sd_coefficients(F20)
    sd02 = sd_coefficients(F02)
    diff = sd20 - sd02
    res_sd = np.sqrt((diff**2).sum((-2, -1)))

    # gamma acts on the (base, fiber) indices; move quaternion axis out front
    L = np.moveaxis(F11, -1, -3)  # (..., q, a, b)
    g = np.array(L)
    J_mats = [complex_structure(m, offset=4) for m in standard_hyperkahler_triples()[1]]
    I_mats = _TRIPLE
    for Ji, Ii in zip(J_mats, I_mats):
        g = g - np.einsum("ap,...qpc,cb->...qab", Ji, L, Ii)
    g = g / 4.0
    res_gamma = np.sqrt((g**2).sum((-3, -2, -1)))

    v28 = np.zeros(points.shape[:-1] + (28, 4))
    for pos, (i, j) in enumerate(TWO_FORM_INDEX):
        v28[..., pos, :] = F[..., i, j, :]
    e7 = np.einsum("ab,...bq->...aq", s.proj7_matrix(), v28)
    res_7 = np.sqrt((e7**2).sum((-2, -1)))

    consistency = np.abs(res_7**2 - res_sd**2 - res_gamma**2).max()
    return InstantonComponentReport(
        float(res_sd.max()), float(res_gamma.max()), float(res_7.max()), float(consistency)
    )
