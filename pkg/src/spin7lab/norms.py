"""Weighted Hoelder norm machinery on sampled fields.

The weight family depends on (ell, delta, lambda):

    w(r) = lambda^delta (lambda + r)^(-ell-delta)   for r <= sqrt(lambda)
    w(r) = r^(delta - ell)                          for r >  sqrt(lambda)

where r is the distance to the center set (in the flat model, the norm of
the fiber coordinate).  Norms computed on finite samples are lower bounds
for the continuum suprema; refinement stability is the acceptance proxy.
Pair weights use the symmetric minimum w(x, y) = min{w(x), w(y)}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "WeightSpec",
    "weight",
    "SampledField",
    "weighted_sup_norm",
    "weighted_holder_seminorm",
    "holder_norm",
    "check_multiplication",
    "delta_norm_comparison",
    "r8_model_weight",
    "r8_weight_comparison",
]

LAMBDA_MAX = 0.25  # gluing-parameter ceiling shared across the package


@dataclass(frozen=True)
class WeightSpec:
    ell: float
    delta: float
    lam: float

    def __post_init__(self):
        if not 0 < self.lam:
            raise ValueError("lambda must be positive")

    def shifted(self, dell=0.0, ddelta=0.0):
        return WeightSpec(self.ell + dell, self.delta + ddelta, self.lam)


def weight(spec: WeightSpec, r):
    """Evaluate the weight function at radii r (scalar or array)."""
    r = np.asarray(r, float)
    lam, ell, delta = spec.lam, spec.ell, spec.delta
    inner = lam**delta * (lam + r) ** (-ell - delta)
    outer = r ** (delta - ell) if np.ndim(r) == 0 and r > 0 else np.where(r > 0, r, 1.0) ** (delta - ell)
    return np.where(r <= np.sqrt(lam), inner, outer)


@dataclass
class SampledField:
    """Field samples with radii and precomputed admissible Hoelder pairs.

    ``values`` may have any tensor shape per sample; ``norms`` is the
    per-sample Euclidean norm.  Admissible pairs satisfy
    d(x, y) <= lambda + min(r(x), r(y)).
    """

    positions: np.ndarray  # (N, d)
    radii: np.ndarray  # (N,)
    values: np.ndarray  # (N, ...)
    pairs: np.ndarray = None  # (M, 2) int
    pair_dist: np.ndarray = field(default=None, repr=False)

    @property
    def norms(self):
        v = self.values.reshape(len(self.radii), -1)
        return np.linalg.norm(v, axis=1)

    @classmethod
    def from_samples(cls, positions, values, radii=None, lam=None, pair_cap=100_000, rng=0):
        """Build a field and (optionally) a stratified admissible pair set."""
        positions = np.asarray(positions, float)
        if radii is None:
            # flat-model default: distance to Q = norm of the fiber coordinate
            radii = np.linalg.norm(positions[:, 4:] if positions.shape[1] == 8 else positions, axis=1)
        f = cls(positions, np.asarray(radii, float), np.asarray(values))
        if lam is not None:
            f.build_pairs(lam, pair_cap, rng)
        return f

    def build_pairs(self, lam, cap=100_000, rng=0):
        n = len(self.radii)
        gen = np.random.default_rng(rng)
        if n * (n - 1) // 2 <= cap:
            ii, jj = np.triu_indices(n, k=1)
        else:
            # stratified by radius: sort, then sample index pairs biased to
            # nearby strata so small-separation pairs are represented
            order = np.argsort(self.radii)
            ii = gen.integers(0, n, size=2 * cap)
            off = np.clip(ii + gen.integers(-n // 8, n // 8 + 1, size=2 * cap), 0, n - 1)
            ii, jj = order[ii], order[off]
            keep = ii != jj
            ii, jj = ii[keep][:cap], jj[keep][:cap]
        d = np.linalg.norm(self.positions[ii] - self.positions[jj], axis=1)
        ok = d <= lam + np.minimum(self.radii[ii], self.radii[jj])
        ok &= d > 0
        self.pairs = np.stack([ii[ok], jj[ok]], axis=1)
        self.pair_dist = d[ok]
        return self

    def with_values(self, values):
        return SampledField(self.positions, self.radii, np.asarray(values), self.pairs, self.pair_dist)


def weighted_sup_norm(f: SampledField, spec: WeightSpec):
    """max over samples of w(r) |f|; monotone under sample refinement."""
    if len(f.radii) == 0:
        raise ValueError("empty sample set")
    return float(np.max(weight(spec, f.radii) * f.norms))


def weighted_holder_seminorm(f: SampledField, spec: WeightSpec, alpha):
    """max over admissible pairs of min-weight * |f(x)-f(y)| / d^alpha.

    The pair weight is taken at parameters (ell - alpha, delta).
    """
    if f.pairs is None or len(f.pairs) == 0:
        return 0.0
    ii, jj = f.pairs[:, 0], f.pairs[:, 1]
    w = weight(spec.shifted(dell=-alpha), f.radii)
    wmin = np.minimum(w[ii], w[jj])
    flat = f.values.reshape(len(f.radii), -1)
    diff = np.linalg.norm(flat[ii] - flat[jj], axis=1)
    return float(np.max(wmin * diff / f.pair_dist**alpha))


def holder_norm(f: SampledField, spec: WeightSpec, alpha):
    """The C^{0,alpha} norm: weighted sup plus Hoelder seminorm."""
    return weighted_sup_norm(f, spec) + weighted_holder_seminorm(f, spec, alpha)


def check_multiplication(f: SampledField, g: SampledField, spec_f: WeightSpec,
                         spec_g: WeightSpec, alpha, pairing=None):
    """Check ||f.g|| at (ell1+ell2, delta1+delta2) <= ||f|| ||g||.

    ``pairing`` maps (values_f, values_g) -> product values and must satisfy
    |f.g| <= |f||g| pointwise (e.g. half the su(2) bracket).  Returns
    (holds, margin) with margin = rhs - lhs.
    """
    if pairing is None:
        pairing = lambda a, b: a * b
    if spec_f.lam != spec_g.lam:
        raise ValueError("weight specs must share lambda")
    prod = f.with_values(pairing(f.values, g.values))
    spec_p = WeightSpec(spec_f.ell + spec_g.ell, spec_f.delta + spec_g.delta, spec_f.lam)
    lhs = holder_norm(prod, spec_p, alpha)
    rhs = holder_norm(f, spec_f, alpha) * holder_norm(g, spec_g, alpha)
    return bool(lhs <= rhs + 1e-12 * rhs), float(rhs - lhs)


def delta_norm_comparison(f: SampledField, spec: WeightSpec, alpha, c=4.0):
    """Ratios between the delta-weighted and delta=0 norms for delta < 0.

    Returns (r1, r2) with r1 = ||f||_{ell,delta}/||f||_{ell,0} and r2 its
    reciprocal pairing; asserts r1 <= c lambda^{delta/2} and r2 <= c.
    """
    if spec.delta >= 0:
        raise ValueError("requires delta < 0")
    spec0 = WeightSpec(spec.ell, 0.0, spec.lam)
    nd = holder_norm(f, spec, alpha)
    n0 = holder_norm(f, spec0, alpha)
    r1, r2 = nd / n0, n0 / nd
    bound1 = c * spec.lam ** (spec.delta / 2)
    if r1 > bound1 or r2 > c * spec.lam ** (-0.0):
        raise AssertionError(
            f"delta-norm comparison failed: r1={r1:.4g} (bound {bound1:.4g}), r2={r2:.4g} (bound {c})"
        )
    return float(r1), float(r2)


def r8_model_weight(beta, r):
    """The R^8 model weight multiplier (1 + r)^-beta for the L^inf_beta norm."""
    return (1.0 + np.asarray(r, float)) ** (-beta)


def r8_weight_comparison(beta, radii):
    """Two-sided comparison of the R^8 model weight with the lambda=1 family.

    Compares (1+r)^-beta against weight(WeightSpec(beta, 0, 1), r) and
    returns (max_ratio, min_ratio) over the sampled radii.
    """
    w_model = r8_model_weight(beta, radii)
    w_global = weight(WeightSpec(beta, 0.0, 1.0), radii)
    ratio = w_model / w_global
    return float(ratio.max()), float(ratio.min())
