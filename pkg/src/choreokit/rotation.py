"""Axis-angle utilities on the rotation manifold.

All functions broadcast over leading dimensions: a "vector" argument is any
(..., 3) array, a "matrix" any (..., 3, 3) stack.
"""

from __future__ import annotations

import numpy as np

SQRT2 = float(np.sqrt(2.0))

# Below this angle Rodrigues' trig coefficients switch to their Taylor forms.
_SMALL_ANGLE = 1e-8


def canonicalize(omega) -> np.ndarray:
    # Wrap to the equivalent rotation with angle <= pi; idempotent.
    out = np.array(omega, dtype=float)
    flat = out.reshape(-1, 3)
    angle = np.linalg.norm(flat, axis=1)
    big = angle > np.pi
    if big.any():
        a = angle[big]
        wrapped = np.mod(a, 2.0 * np.pi)  # [0, 2pi)
        wrapped = np.where(wrapped > np.pi, wrapped - 2.0 * np.pi, wrapped)
        flat[big] *= (wrapped / a)[:, None]
    return out


def hat(omega) -> np.ndarray:
    # 3-vector -> skew-symmetric cross-product matrix
    w = np.asarray(omega, dtype=float)
    m = np.zeros(w.shape[:-1] + (3, 3))
    m[..., 0, 1] = -w[..., 2]
    m[..., 0, 2] = w[..., 1]
    m[..., 1, 0] = w[..., 2]
    m[..., 1, 2] = -w[..., 0]
    m[..., 2, 0] = -w[..., 1]
    m[..., 2, 1] = w[..., 0]
    return m


def rotation_matrices(omega) -> np.ndarray:
    # Rodrigues formula with Taylor fallbacks near zero angle
    w = np.asarray(omega, dtype=float)
    theta = np.linalg.norm(w, axis=-1)
    theta2 = theta * theta
    small = theta < _SMALL_ANGLE
    safe = np.where(small, 1.0, theta)
    k1 = np.where(small, 1.0 - theta2 / 6.0, np.sin(theta) / safe)
    k2 = np.where(small, 0.5 - theta2 / 24.0, (1.0 - np.cos(theta)) / (safe * safe))
    m = hat(w)
    m2 = m @ m
    out = k1[..., None, None] * m + k2[..., None, None] * m2
    out[..., 0, 0] += 1.0
    out[..., 1, 1] += 1.0
    out[..., 2, 2] += 1.0
    return out


def relative_angle(r1, r2) -> np.ndarray:
    """Rotation angle of r1^T r2, in [0, pi].

    Uses the arctangent of the skew part against the trace, which stays
    accurate near both 0 and pi where an arccos of the trace does not.
    """
    m = np.swapaxes(np.asarray(r1, dtype=float), -1, -2) @ np.asarray(r2, dtype=float)
    return rotation_matrix_angle(m)


def rotation_matrix_angle(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    cos = 0.5 * (m[..., 0, 0] + m[..., 1, 1] + m[..., 2, 2] - 1.0)
    sx = m[..., 2, 1] - m[..., 1, 2]
    sy = m[..., 0, 2] - m[..., 2, 0]
    sz = m[..., 1, 0] - m[..., 0, 1]
    sin = 0.5 * np.sqrt(sx * sx + sy * sy + sz * sz)
    return np.arctan2(sin, cos)
