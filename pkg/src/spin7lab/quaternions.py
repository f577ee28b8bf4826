"""Quaternion algebra on numpy arrays with shape (..., 4).

The last axis holds (q0, q1, q2, q3) = q0 + q1 i + q2 j + q3 k.  Pure
imaginary quaternions model su(2); the Lie bracket is the quaternion
commutator.  All routines accept complex dtype (used for Fourier-mode
fields).
"""

from __future__ import annotations

import numpy as np

E = np.eye(4)  # the units 1, i, j, k as quaternion vectors


def mul(a, b):
    a0, a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    b0, b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


def conj(a):
    out = np.array(a, copy=True)
    out[..., 1:] *= -1
    return out


def im(a):
    out = np.array(a, copy=True)
    out[..., 0] = 0
    return out


def re(a):
    return a[..., 0]


def bracket(a, b):
    return mul(a, b) - mul(b, a)


def norm(a):
    return np.linalg.norm(a, axis=-1)


def norm_sq(a):
    return (np.abs(a) ** 2).sum(axis=-1)


def unit(a):
    return a / norm(a)[..., None]


def left_mult_matrix(q):
    """4x4 real matrix of x -> q x."""
    q = np.asarray(q, dtype=float)
    cols = [mul(q, E[m]) for m in range(4)]
    return np.stack(cols, axis=-1)


def is_pure_imaginary(a, tol=1e-12):
    return np.all(np.abs(a[..., 0]) <= tol)
