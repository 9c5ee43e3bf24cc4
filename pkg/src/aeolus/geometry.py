"""Quaternion and angle helpers shared by the physics, sensing and scenario code.

Conventions used throughout the engine:

* world frame: right-handed, ``x`` east, ``y`` up, ``z`` north;
* body frame:  right-handed, ``x`` forward, ``y`` up, ``z`` port;
* quaternions are stored ``[w, x, y, z]`` and map body vectors into the world
  frame;
* horizontal bearings are signed degrees, positive to starboard.
"""

from __future__ import annotations

import numpy as np

UP = np.array([0.0, 1.0, 0.0])


def quat_identity() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 0.0])


def quat_normalize(q: np.ndarray) -> np.ndarray:
    return q / np.linalg.norm(q)


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n < 1e-15:
        return quat_identity()
    half = 0.5 * angle
    q = np.empty(4)
    q[0] = np.cos(half)
    q[1:] = axis / n * np.sin(half)
    return q


def quat_from_yaw(yaw: float) -> np.ndarray:
    """Heading-only orientation.

    ``yaw`` is the signed angle (radians, starboard positive) of the bow away
    from world ``+x``.  In this y-up right-handed frame a positive rotation
    about ``+y`` already swings the bow to starboard.
    """
    return quat_from_axis_angle(UP, yaw)


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    return quat_to_matrix(q) @ np.asarray(v, dtype=float)


def quats_to_matrices(qs: np.ndarray) -> np.ndarray:
    """Batched quaternion -> rotation matrix, (n, 4) -> (n, 3, 3)."""
    w, x, y, z = qs[:, 0], qs[:, 1], qs[:, 2], qs[:, 3]
    out = np.empty((len(qs), 3, 3))
    out[:, 0, 0] = 1 - 2 * (y * y + z * z)
    out[:, 0, 1] = 2 * (x * y - w * z)
    out[:, 0, 2] = 2 * (x * z + w * y)
    out[:, 1, 0] = 2 * (x * y + w * z)
    out[:, 1, 1] = 1 - 2 * (x * x + z * z)
    out[:, 1, 2] = 2 * (y * z - w * x)
    out[:, 2, 0] = 2 * (x * z - w * y)
    out[:, 2, 1] = 2 * (y * z + w * x)
    out[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return out


def quat_integrate(q: np.ndarray, omega: np.ndarray, dt: float) -> np.ndarray:
    """Advance orientation by a world-frame angular velocity over ``dt``.

    Uses the exact exponential map, so a constant spin traces a circle instead
    of spiralling outward.
    """
    w = np.asarray(omega, dtype=float)
    angle = np.linalg.norm(w) * dt
    if angle < 1e-12:
        return quat_normalize(q)
    dq = quat_from_axis_angle(w, angle)
    return quat_normalize(quat_multiply(dq, q))


def wrap_pi(angle: float) -> float:
    return (angle + np.pi) % (2.0 * np.pi) - np.pi


def wrap_deg(angle: float) -> float:
    """Wrap degrees into (-180, 180]."""
    a = -((-angle + 180.0) % 360.0 - 180.0)
    return 180.0 if a == -180.0 else a


def horizontal(v: np.ndarray) -> np.ndarray:
    out = np.array(v, dtype=float)
    out[1] = 0.0
    return out


def unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n < 1e-12:
        return np.zeros_like(np.asarray(v, dtype=float))
    return np.asarray(v, dtype=float) / n


def signed_horizontal_angle(v_from: np.ndarray, v_to: np.ndarray) -> float:
    """Signed horizontal angle in degrees from ``v_from`` to ``v_to``.

    Positive when ``v_to`` lies to starboard of ``v_from`` (y-up world).
    Returns 0 when either projection vanishes.
    """
    a = horizontal(v_from)
    b = horizontal(v_to)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na < 1e-12 or nb < 1e-12:
        return 0.0
    a /= na
    b /= nb
    cross_y = a[2] * b[0] - a[0] * b[2]
    dot = float(np.clip(a @ b, -1.0, 1.0))
    return float(np.degrees(np.arctan2(cross_y, dot)))


def bearing_to_direction(bearing_deg: float) -> np.ndarray:
    """Body-frame horizontal unit vector at a signed bearing off the bow."""
    a = np.radians(bearing_deg)
    return np.array([np.cos(a), 0.0, -np.sin(a)])
