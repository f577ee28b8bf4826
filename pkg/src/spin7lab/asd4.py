"""The charge-one SU(2) ASD instanton family on R^4 and its deformations.

Gauge fields take values in su(2) = Im H; a connection is a map from sample
points (N, 4) to components (N, 4, 4): form index first, quaternion last.
The closed-form family in regular gauge is

    A(x) = Ad_q [ Im(xbar dx) / (lam^2 + |x - c|^2) ]          (xbar = conj)

with center c, scale lam and framing q acting by conjugation on the su(2)
values.  Its curvature F = dA + A ^ A equals

    Ad_q [ (ebar_m e_n - ebar_n e_m) lam^2 / (lam^2 + |x-c|^2)^2 ]

which is anti-self-dual for the orientation e^{0123}.  The Yang-Mills energy
uses the inner product <a, b> = -tr(ab) on su(2) (= 2 x the quaternion dot
product), making the charge-one energy equal to 8 pi^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import quaternions as qt

__all__ = [
    "GaugeField4",
    "InfinitesimalDeformation",
    "one_instanton",
    "curvature",
    "sd_part",
    "asd_part",
    "sd_coefficients",
    "yang_mills_energy",
    "delta_apply",
    "moduli_tangent_basis",
    "quaternionic_action",
    "gram_matrix",
    "radial_sphere_points",
    "decay_slope",
    "pointwise_norm",
]

#: self-dual basis pairs: sd_i = e^{0i} + e^{jk}; asd_i = e^{0i} - e^{jk}
_SD_PAIRS = ((0, 1, 2, 3, 1.0), (0, 2, 1, 3, -1.0), (0, 3, 1, 2, 1.0))


def _check_su2(values, tol=1e-12):
    if not qt.is_pure_imaginary(values, tol):
        raise ValueError("values are not traceless anti-Hermitian (pure imaginary)")


@dataclass(frozen=True)
class GaugeField4:
    """A connection on R^4, closed form or grid sampled."""

    kind: str  # "closed-form-one-instanton" | "grid-samples"
    center: np.ndarray = None
    scale: float = 1.0
    framing: np.ndarray = None
    grid: "GridField" = None

    def __post_init__(self):
        if self.kind == "closed-form-one-instanton":
            if self.scale <= 0:
                raise ValueError("scale must be positive")
            c = np.zeros(4) if self.center is None else np.asarray(self.center, float)
            q = np.array([1.0, 0, 0, 0]) if self.framing is None else np.asarray(self.framing, float)
            if abs(qt.norm(q) - 1) > 1e-12:
                raise ValueError("framing must be a unit quaternion")
            object.__setattr__(self, "center", c)
            object.__setattr__(self, "framing", q)
        elif self.kind != "grid-samples":
            raise ValueError(f"unknown kind {self.kind!r}")

    def __call__(self, x):
        """Connection components at points x of shape (..., 4) -> (..., 4, 4)."""
        if self.kind == "grid-samples":
            return self.grid(x)
        y = np.asarray(x, float) - self.center
        r2 = (y**2).sum(-1)[..., None, None]
        comps = np.stack(
            [qt.im(qt.mul(qt.conj(y), np.broadcast_to(qt.E[m], y.shape))) for m in range(4)],
            axis=-2,
        )
        return _ad(self.framing, comps / (self.scale**2 + r2))


@dataclass(frozen=True)
class GridField:
    """su(2)-valued 1-form samples on a uniform cell-centered box grid."""

    origin: np.ndarray  # corner of the box
    spacing: float
    values: np.ndarray  # (n, n, n, n, 4, 4)

    def __call__(self, x):
        idx = np.rint((np.asarray(x) - self.origin) / self.spacing - 0.5).astype(int)
        n = self.values.shape[0]
        if np.any(idx < 0) or np.any(idx >= n):
            raise ValueError("point outside sampled grid")
        return self.values[idx[..., 0], idx[..., 1], idx[..., 2], idx[..., 3]]


def _ad(q, values):
    """Pointwise adjoint action q . v . qbar on the quaternion axis."""
    qb = np.broadcast_to(q, values.shape)
    return qt.mul(qt.mul(qb, values), qt.conj(qb))


def one_instanton(center=None, scale=1.0, framing=None) -> GaugeField4:
    """The regular-gauge charge-one ASD instanton with the given parameters."""
    return GaugeField4("closed-form-one-instanton", center=center, scale=scale, framing=framing)


# ---------------------------------------------------------------------------
# curvature and the SD/ASD split


def _fd4_1form(field, x, h):
    """4th-order central differences of a 1-form sampler: d[m][..., n, q]."""
    out = []
    for m in range(4):
        xp, xm = x.copy(), x.copy()
        xp2, xm2 = x.copy(), x.copy()
        xp[..., m] += h
        xm[..., m] -= h
        xp2[..., m] += 2 * h
        xm2[..., m] -= 2 * h
        out.append((8 * (field(xp) - field(xm)) - (field(xp2) - field(xm2))) / (12 * h))
    return out


def curvature(A: GaugeField4, fd_step=1e-3):
    """Curvature sampler x -> F with F[..., m, n, :] = F_{mn}.

    Closed-form connections use the analytic formula; grid samples fall back
    to 4th-order central differences (points must stay inside the grid).
    """
    if A.kind == "closed-form-one-instanton":

        def F(x):
            y = np.asarray(x, float) - A.center
            r2 = (y**2).sum(-1)
            prof = (A.scale**2 / (A.scale**2 + r2) ** 2)[..., None]
            out = np.zeros(y.shape[:-1] + (4, 4, 4))
            for m in range(4):
                for n in range(m + 1, 4):
                    c = qt.mul(qt.conj(qt.E[m]), qt.E[n]) - qt.mul(qt.conj(qt.E[n]), qt.E[m])
                    out[..., m, n, :] = c * prof
                    out[..., n, m, :] = -c * prof
            return _ad(A.framing, out)

        return F

    h = A.grid.spacing if A.kind == "grid-samples" else fd_step

    def F(x):
        x = np.asarray(x, float)
        d = _fd4_1form(A, x, h)
        Av = A(x)
        out = np.zeros(x.shape[:-1] + (4, 4, 4))
        for m in range(4):
            for n in range(m + 1, 4):
                val = d[m][..., n, :] - d[n][..., m, :] + qt.bracket(Av[..., m, :], Av[..., n, :])
                out[..., m, n, :] = val
                out[..., n, m, :] = -val
        return out

    return F


def sd_coefficients(F):
    """Self-dual coefficients c_i of a 2-form: F+ = sum_i c_i (e^{0i} + e^{jk})."""
    F = np.asarray(F)
    cs = []
    for (a, b, c, d, s) in _SD_PAIRS:
        cs.append((F[..., a, b, :] + s * F[..., c, d, :]) / 2)
    return np.stack(cs, axis=-2)


def asd_coefficients(F):
    F = np.asarray(F)
    cs = []
    for (a, b, c, d, s) in _SD_PAIRS:
        cs.append((F[..., a, b, :] - s * F[..., c, d, :]) / 2)
    return np.stack(cs, axis=-2)


def _from_coefficients(cs, sign):
    out = np.zeros(cs.shape[:-2] + (4, 4) + cs.shape[-1:], dtype=cs.dtype)
    for i, (a, b, c, d, s) in enumerate(_SD_PAIRS):
        out[..., a, b, :] += cs[..., i, :]
        out[..., b, a, :] -= cs[..., i, :]
        out[..., c, d, :] += sign * s * cs[..., i, :]
        out[..., d, c, :] -= sign * s * cs[..., i, :]
    return out


def sd_part(F):
    """Pointwise self-dual part of 2-form values (..., 4, 4, 4)."""
    return _from_coefficients(sd_coefficients(F), +1)


def asd_part(F):
    return _from_coefficients(asd_coefficients(F), -1)


def pointwise_norm(values):
    """Euclidean norm over every axis except the leading sample axes.

    For 2-forms indexed (..., m, n, q) with both (m,n) and (n,m) stored the
    double counting is removed.
    """
    v = np.asarray(values)
    if v.ndim >= 3 and v.shape[-3] == 4 and v.shape[-2] == 4:
        return np.sqrt((np.abs(v) ** 2).sum((-3, -2, -1)) / 2)
    axes = tuple(range(v.ndim - 2, v.ndim)) if v.ndim >= 2 else (-1,)
    return np.sqrt((np.abs(v) ** 2).sum(axes))


# ---------------------------------------------------------------------------
# energy


def yang_mills_energy(A: GaugeField4, radius=40.0, n_sphere=8, rng=None):
    """YM energy int |F|^2 with <a,b> = -tr(ab), by radial-spherical quadrature.

    The integrand is averaged over ``n_sphere`` directions per shell (the
    one-instanton profile is exactly SO(4)-invariant about its center), the
    radial integral uses adaptive quadrature on [0, radius], and the tail is
    bounded analytically from the r^-8 curvature decay and added as its
    midpoint estimate.
    """
    F = curvature(A)
    rng = np.random.default_rng(0 if rng is None else rng)
    dirs = rng.standard_normal((n_sphere, 4))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)

    def shell_density(r):
        pts = A.center + r * dirs
        val = 2 * (pointwise_norm(F(pts)) ** 2).mean()  # factor 2: -tr vs dot
        return val * 2 * np.pi**2 * r**3

    integral, _ = integrate.quad(shell_density, 0.0, radius, limit=200)
    # |F|^2 <= C r^-8 tail with C estimated on the boundary shell
    c_tail = 2 * (pointwise_norm(F(A.center + radius * dirs)) ** 2).mean() * radius**8
    tail = 2 * np.pi**2 * c_tail / (4 * radius**4)
    return integral + tail


# ---------------------------------------------------------------------------
# the deformation operator delta_I = (d*_I, d+_I)


def delta_apply(I: GaugeField4, a, x, fd_step=1e-2):
    """Apply delta_I a = (d*_I a, d+_I a) at sample points.

    ``a`` is a 1-form sampler; derivatives are 4th-order central differences
    of step ``fd_step``.  Returns (dstar, sd) with dstar of shape (..., 4)
    and sd the three self-dual coefficients (..., 3, 4).
    """
    x = np.asarray(x, float)
    d = _fd4_1form(a, x, fd_step)
    Iv, av = I(x), a(x)
    dstar = -sum(d[m][..., m, :] + qt.bracket(Iv[..., m, :], av[..., m, :]) for m in range(4))
    cov = np.zeros(x.shape[:-1] + (4, 4, 4))
    for m in range(4):
        for n in range(4):
            cov[..., m, n, :] = (
                d[m][..., n, :]
                - d[n][..., m, :]
                + qt.bracket(Iv[..., m, :], av[..., n, :])
                - qt.bracket(Iv[..., n, :], av[..., m, :])
            )
    return dstar, sd_coefficients(cov)


@dataclass(frozen=True)
class InfinitesimalDeformation:
    """A kernel element of delta_I with its label and closed-form sampler."""

    label: str
    sampler: object

    def __call__(self, x):
        return self.sampler(x)


def moduli_tangent_basis(I: GaugeField4):
    """The 8 closed-form elements of ker delta_I for the one-instanton.

    Translations are the Coulomb-corrected parameter derivatives iota_e_m F
    (raw derivatives minus d_I of the gauge parameter A_m); the dilation mode
    is the raw scale derivative, which is already in Coulomb gauge; framing
    modes are the images of the dilation mode under the quaternionic action
    of the unit self-dual forms, which commutes with delta_I.
    """
    if I.kind != "closed-form-one-instanton":
        raise ValueError("tangent basis requires the closed-form family")
    F = curvature(I)

    def translation(nu):
        def s(x):
            return F(x)[..., nu, :, :]

        return s

    def dilation(x):
        y = np.asarray(x, float) - I.center
        r2 = (y**2).sum(-1)[..., None, None]
        comps = np.stack(
            [qt.im(qt.mul(qt.conj(y), np.broadcast_to(qt.E[m], y.shape))) for m in range(4)],
            axis=-2,
        )
        return _ad(I.framing, -2 * I.scale * comps / (I.scale**2 + r2) ** 2)

    fields = [
        InfinitesimalDeformation(f"translation_{m}", translation(m)) for m in range(4)
    ]
    fields.append(InfinitesimalDeformation("dilation", dilation))
    from .exterior8 import standard_hyperkahler_triples, complex_structure

    omegas, _ = standard_hyperkahler_triples()
    for i, w in enumerate(omegas):
        fields.append(
            InfinitesimalDeformation(
                f"framing_{i+1}", quaternionic_action(complex_structure(w), dilation)
            )
        )
    return fields


def quaternionic_action(J, field):
    """Action of a unit self-dual form on 1-forms: (J a)_m = sum_n J[m,n] a_n."""

    def s(x):
        return np.einsum("mn,...nq->...mq", J, field(x))

    return s


def gram_matrix(fields, r_max=30.0, n_r=400, n_sphere=16, rng=0):
    """L^2 Gram matrix of 1-form fields by radial-spherical quadrature."""
    rng = np.random.default_rng(rng)
    dirs = rng.standard_normal((n_sphere, 4))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = np.linspace(r_max / n_r, r_max, n_r)
    pts = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, 4)
    vals = np.stack([f(pts) for f in fields])  # (8, N, 4, 4)
    meas = (2 * np.pi**2 * radii**3 * (r_max / n_r) / n_sphere)
    w = np.repeat(meas, n_sphere)
    return 2 * np.einsum("aimq,bimq,i->ab", vals, vals, w)


# ---------------------------------------------------------------------------
# decay measurement


def radial_sphere_points(radii, n_sphere=32, rng=0, center=None):
    """Shells of quasi-uniform directions: returns (n_r, n_sphere, 4)."""
    rng = np.random.default_rng(rng)
    dirs = rng.standard_normal((n_sphere, 4))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = np.asarray(radii)[:, None, None] * dirs[None]
    if center is not None:
        pts = pts + np.asarray(center)
    return pts


def decay_slope(profile_fn, r_min=5.0, r_max=50.0, n=25):
    """Least-squares slope of log |f| against log r over [r_min, r_max]."""
    radii = np.geomspace(r_min, r_max, n)
    vals = np.asarray([profile_fn(r) for r in radii])
    mask = vals > 0
    coef = np.polyfit(np.log(radii[mask]), np.log(vals[mask]), 1)
    return float(coef[0])
