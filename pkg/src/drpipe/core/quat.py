"""Unit-quaternion helpers (w, x, y, z convention, Hamilton product)."""

from __future__ import annotations

import math

import numpy as np

from ..errors import NonUnitQuaternion

Quat = tuple[float, float, float, float]

IDENTITY: Quat = (1.0, 0.0, 0.0, 0.0)

UNIT_TOL = 1e-6


def norm(q) -> float:
    return math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])


def normalize(q) -> Quat:
    n = norm(q)
    if n == 0.0:
        raise NonUnitQuaternion("zero quaternion")
    return (q[0] / n, q[1] / n, q[2] / n, q[3] / n)


def check_unit(q, tol: float = UNIT_TOL) -> None:
    if abs(norm(q) - 1.0) > tol:
        raise NonUnitQuaternion(f"|q| = {norm(q)!r} deviates from 1 by more than {tol}")


def mul(a, b) -> Quat:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


def conjugate(q) -> Quat:
    return (q[0], -q[1], -q[2], -q[3])


def from_axis_angle(axis, degrees: float) -> Quat:
    ax = np.asarray(axis, dtype=np.float64)
    n = np.linalg.norm(ax)
    if n == 0.0:
        raise ValueError("zero rotation axis")
    ax = ax / n
    half = math.radians(degrees) / 2.0
    s = math.sin(half)
    return (math.cos(half), ax[0] * s, ax[1] * s, ax[2] * s)


def to_matrix(q) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ],
        dtype=np.float64,
    )


def from_matrix(m: np.ndarray) -> Quat:
    """Rotation matrix -> unit quaternion with w >= 0 (Shepperd's method)."""
    m = np.asarray(m, dtype=np.float64)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0.0:
        s = math.sqrt(tr + 1.0) * 2.0
        q = (s / 4.0, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s)
    elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        q = ((m[2, 1] - m[1, 2]) / s, s / 4.0, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s)
    elif m[1, 1] >= m[2, 2]:
        s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
        q = ((m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, s / 4.0, (m[1, 2] + m[2, 1]) / s)
    else:
        s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
        q = ((m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, s / 4.0)
    q = normalize(q)
    if q[0] < 0.0 or (q[0] == 0.0 and _first_nonzero_negative(q)):
        q = (-q[0], -q[1], -q[2], -q[3])
    return q


def _first_nonzero_negative(q) -> bool:
    for c in q[1:]:
        if c != 0.0:
            return c < 0.0
    return False


def rotate(q, v) -> np.ndarray:
    return to_matrix(q) @ np.asarray(v, dtype=np.float64)


def slerp(q0, q1, alpha: float) -> Quat:
    """Spherical interpolation along the shorter arc."""
    d = q0[0] * q1[0] + q0[1] * q1[1] + q0[2] * q1[2] + q0[3] * q1[3]
    if d < 0.0:
        q1 = (-q1[0], -q1[1], -q1[2], -q1[3])
        d = -d
    d = min(d, 1.0)
    if d > 1.0 - 1e-12:
        out = tuple(a + alpha * (b - a) for a, b in zip(q0, q1))
        return normalize(out)
    theta = math.acos(d)
    s = math.sin(theta)
    w0 = math.sin((1.0 - alpha) * theta) / s
    w1 = math.sin(alpha * theta) / s
    return normalize(tuple(w0 * a + w1 * b for a, b in zip(q0, q1)))


def geodesic_deg(q1, q2) -> float:
    """Rotation angle between two unit quaternions, in degrees within [0, 180].

    Sign-insensitive (q and -q describe the same rotation). The dot product
    is normalized by both norms so the self-distance of an f32-quantized
    quaternion is exactly zero.
    """
    check_unit(q1)
    check_unit(q2)
    d = abs(q1[0] * q2[0] + q1[1] * q2[1] + q1[2] * q2[2] + q1[3] * q2[3])
    d = min(d / (norm(q1) * norm(q2)), 1.0)
    return math.degrees(2.0 * math.acos(d))
