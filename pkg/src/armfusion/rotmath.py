"""Rotation kernels: quaternions, rotation matrices, Slerp, swing-twist and tilt-and-torsion.

Conventions
-----------
* Quaternions are numpy arrays ``[w, x, y, z]`` (Hamilton product, scalar first).
* A rotation matrix ``R`` maps body (sensor) coordinates to world coordinates,
  ``v_world = R @ v_body``. World ``+Z`` points up, against gravity.
* Tilt-and-torsion angles recompose as ``R = Rz(azimuth) @ Ry(tilt) @ Rz(torsion - azimuth)``.
* Swing-twist splits ``R = Rz @ Rxy`` with the twist ``Rz`` about world Z applied last.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import InvalidRotationError

#: maximum tolerated deviation of ``R.T @ R`` from identity for input validation
ORTHONORMAL_TOL = 1e-6
#: below this inter-quaternion angle Slerp falls back to normalized lerp
SLERP_LERP_THRESHOLD = 1e-6
#: sin(tilt) below which tilt-and-torsion treats the rotation as pure twist
TILT_DEGENERATE_SIN = 1e-12

WORLD_DOWN = np.array([0.0, 0.0, -1.0])


class TiltTorsion(NamedTuple):
    """Azimuth in (-pi, pi], tilt in [0, pi], torsion in (-pi, pi], radians."""

    azimuth: float
    tilt: float
    torsion: float


def wrap_angle(a):
    """Wrap an angle to (-pi, pi]."""
    w = math.remainder(a, 2.0 * math.pi)
    if w <= -math.pi:
        w += 2.0 * math.pi
    return w


# --- elementary rotations -------------------------------------------------

def rot_x(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def skew(v):
    """Cross-product matrix ``[v]x`` such that ``skew(v) @ u == cross(v, u)``."""
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def matrix_from_rotvec(rotvec):
    """Rodrigues formula: exact exponential map of a rotation vector (axis * angle)."""
    rotvec = np.asarray(rotvec, dtype=float)
    angle = math.sqrt(rotvec[0] ** 2 + rotvec[1] ** 2 + rotvec[2] ** 2)
    if angle == 0.0:
        return np.eye(3)
    k = skew(rotvec / angle)
    return np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


def rotvec_from_matrix(R):
    """Logarithm map, the inverse of :func:`matrix_from_rotvec` (angle in [0, pi])."""
    q = quat_from_matrix(R, check=False)
    vnorm = math.sqrt(q[1] ** 2 + q[2] ** 2 + q[3] ** 2)
    if vnorm == 0.0:
        return np.zeros(3)
    angle = 2.0 * math.atan2(vnorm, q[0])
    return q[1:] * (angle / vnorm)


def quat_from_rotvec(rotvec):
    """Quaternion of the rotation vector ``rotvec`` (exact, any angle)."""
    x, y, z = rotvec
    angle = math.sqrt(x * x + y * y + z * z)
    if angle == 0.0:
        return np.array([1.0, 0.0, 0.0, 0.0])
    k = math.sin(0.5 * angle) / angle
    return np.array([math.cos(0.5 * angle), k * x, k * y, k * z])


def quat_from_axis_angle(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    h = 0.5 * angle
    return np.concatenate(([math.cos(h)], math.sin(h) * axis))


# --- validation -----------------------------------------------------------

def orthonormality_error(R):
    """Max-entry deviation of ``R.T @ R`` from identity."""
    return float(np.max(np.abs(R.T @ R - np.eye(3))))


def is_rotation(R, tol=ORTHONORMAL_TOL):
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        return False
    return orthonormality_error(R) <= tol and abs(np.linalg.det(R) - 1.0) <= tol


def check_rotation(R, tol=ORTHONORMAL_TOL):
    R = np.asarray(R, dtype=float)
    if not is_rotation(R, tol):
        raise InvalidRotationError(f"not a proper rotation matrix:\n{R}")
    return R


def orthonormalize(R):
    """Gram-Schmidt re-orthonormalization of the columns of ``R``."""
    x = R[:, 0] / np.linalg.norm(R[:, 0])
    y = R[:, 1] - np.dot(x, R[:, 1]) * x
    y /= np.linalg.norm(y)
    z = np.cross(x, y)
    return np.column_stack((x, y, z))


# --- quaternion algebra ---------------------------------------------------

def quat_normalize(q):
    w, x, y, z = _floats(q)
    n = math.sqrt(w * w + x * x + y * y + z * z)
    if n == 0.0 or not math.isfinite(n):
        raise InvalidRotationError("quaternion has zero or non-finite norm")
    return np.array([w / n, x / n, y / n, z / n])


def quat_canonical(q):
    """Pick the representative of ``{q, -q}`` with ``w >= 0`` (ties broken on x, y, z)."""
    for c in q:
        if c > 0.0:
            return q
        if c < 0.0:
            return -q
    return q


def _floats(v):
    # numpy scalar arithmetic is slow; unpack hot-path inputs to Python floats
    return v.tolist() if isinstance(v, np.ndarray) else v


def quat_multiply(p, q):
    pw, px, py, pz = _floats(p)
    qw, qx, qy, qz = _floats(q)
    return np.array([
        pw * qw - px * qx - py * qy - pz * qz,
        pw * qx + px * qw + py * qz - pz * qy,
        pw * qy - px * qz + py * qw + pz * qx,
        pw * qz + px * qy - py * qx + pz * qw,
    ])


def quat_conjugate(q):
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_angle(q0, q1):
    """Rotation angle (rad, in [0, pi]) separating two unit quaternions."""
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    if np.dot(q0, q1) < 0.0:
        q1 = -q1
    # chord form stays accurate for nearly parallel inputs, unlike acos(dot)
    chord = math.sqrt(float(np.dot(q1 - q0, q1 - q0)))
    return 4.0 * math.asin(min(1.0, chord / 2.0))


def matrix_from_quat(q):
    """Rotation matrix of a (re-normalized) quaternion."""
    w, x, y, z = _floats(q)
    n2 = w * w + x * x + y * y + z * z
    if n2 == 0.0 or not math.isfinite(n2):
        raise InvalidRotationError("quaternion has zero or non-finite norm")
    if n2 != 1.0:
        n = math.sqrt(n2)
        w, x, y, z = w / n, x / n, y / n, z / n
    return np.array([
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ])


def quat_from_matrix(R, check=True):
    """Unit quaternion of a rotation matrix, canonicalized to ``w >= 0``.

    Uses Shepperd's branch selection on the largest of the four
    ``(1 +/- R00 +/- R11 +/- R22)`` terms for numerical robustness.

    Raises
    ------
    InvalidRotationError
        If ``check`` is set and ``R`` is not orthonormal within ``ORTHONORMAL_TOL``.
    """
    R = check_rotation(R) if check else np.asarray(R, dtype=float)
    m00, m01, m02 = R[0]
    m10, m11, m12 = R[1]
    m20, m21, m22 = R[2]
    tr = m00 + m11 + m22
    if tr >= m00 and tr >= m11 and tr >= m22:
        s = 2.0 * math.sqrt(max(1.0 + tr, 0.0))
        q = np.array([0.25 * s, (m21 - m12) / s, (m02 - m20) / s, (m10 - m01) / s])
    elif m00 >= m11 and m00 >= m22:
        s = 2.0 * math.sqrt(max(1.0 + m00 - m11 - m22, 0.0))
        q = np.array([(m21 - m12) / s, 0.25 * s, (m01 + m10) / s, (m02 + m20) / s])
    elif m11 >= m22:
        s = 2.0 * math.sqrt(max(1.0 - m00 + m11 - m22, 0.0))
        q = np.array([(m02 - m20) / s, (m01 + m10) / s, 0.25 * s, (m12 + m21) / s])
    else:
        s = 2.0 * math.sqrt(max(1.0 - m00 - m11 + m22, 0.0))
        q = np.array([(m10 - m01) / s, (m02 + m20) / s, (m12 + m21) / s, 0.25 * s])
    return quat_canonical(quat_normalize(q))


def slerp(q0, q1, t):
    """Spherical linear interpolation along the shortest arc.

    ``q1`` is sign-flipped when the pair lies in opposite hemispheres. Nearly
    parallel pairs (angle below ``SLERP_LERP_THRESHOLD``) use normalized lerp.
    """
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    if float(np.dot(q0, q1)) < 0.0:
        q1 = -q1
    # angle between the quaternions on S3, from the chord for precision
    diff = (q1 - q0).tolist()
    chord = math.sqrt(diff[0] ** 2 + diff[1] ** 2 + diff[2] ** 2 + diff[3] ** 2)
    omega = 2.0 * math.asin(min(1.0, chord / 2.0))
    if omega < SLERP_LERP_THRESHOLD:
        return quat_normalize((1.0 - t) * q0 + t * q1)
    so = math.sin(omega)
    out = (math.sin((1.0 - t) * omega) / so) * q0 + (math.sin(t * omega) / so) * q1
    return quat_normalize(out)


# --- decompositions -------------------------------------------------------

def swing_twist_z(q):
    """Split a unit quaternion into ``(twist, swing)`` with ``q = twist * swing``.

    ``twist`` is a pure rotation about world Z; ``swing`` has zero z-component.
    When the swing is a half-turn the twist is undefined and identity is used.
    """
    w, x, y, z = _floats(q)
    n = math.hypot(w, z)
    if n < 1e-15:
        return np.array([1.0, 0.0, 0.0, 0.0]), np.array([w, x, y, z])
    c, s = w / n, z / n
    # conj(twist) * q, whose z-component vanishes identically
    swing = np.array([c * w + s * z, c * x + s * y, c * y - s * x, 0.0])
    return np.array([c, 0.0, 0.0, s]), swing


def decompose_z_xy(R, check=True):
    """Factor ``R = Rz @ Rxy`` into a world-Z twist and a twist-free swing.

    Returns
    -------
    (Rz, Rxy) : tuple of ndarray
        ``Rz`` is an exact rotation about world Z; ``Rxy = Rz.T @ R``, so the
        product reproduces ``R`` to rounding.
    """
    R = check_rotation(R) if check else np.asarray(R, dtype=float)
    q = quat_from_matrix(R, check=False)
    twist, _ = swing_twist_z(q)
    # twist quaternion is (cos h, 0, 0, sin h); build Rz from the angle 2h directly
    c = twist[0] * twist[0] - twist[3] * twist[3]
    s = 2.0 * twist[0] * twist[3]
    Rz = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return Rz, Rz.T @ R


def tilt_torsion_from_rotation(R, check=True):
    """Azimuth, tilt and torsion angles of ``R``.

    Recomposition: ``Rz(azimuth) @ Ry(tilt) @ Rz(torsion - azimuth) == R``.
    At zero tilt the azimuth is 0 and the torsion carries the whole Z rotation;
    at tilt = pi the azimuth is likewise set to 0.
    """
    R = check_rotation(R) if check else np.asarray(R, dtype=float)
    sin_tilt = math.hypot(R[0, 2], R[1, 2])
    tilt = math.atan2(sin_tilt, R[2, 2])
    if sin_tilt > TILT_DEGENERATE_SIN:
        azimuth = math.atan2(R[1, 2], R[0, 2])
        psi = math.atan2(R[2, 1], -R[2, 0])
    elif R[2, 2] > 0.0:
        azimuth, tilt = 0.0, 0.0
        psi = math.atan2(R[1, 0], R[0, 0])
    else:
        azimuth, tilt = 0.0, math.pi
        psi = math.atan2(R[1, 0], R[1, 1])
    return TiltTorsion(wrap_angle(azimuth), tilt, wrap_angle(azimuth + psi))


def rotation_from_tilt_torsion(azimuth, tilt, torsion):
    return rot_z(azimuth) @ rot_y(tilt) @ rot_z(torsion - azimuth)


def elevation_from_rotation(R, v0):
    """Angle (rad, in [0, pi]) between the rotated segment axis ``R @ v0`` and world down.

    Mathematically ``arccos(clamp((R @ v0) . down, -1, 1))``; evaluated with
    ``atan2(|u x down|, u . down)`` which keeps full precision near 0 and pi.
    """
    ux, uy, uz = (np.asarray(R, dtype=float) @ np.asarray(v0, dtype=float)).tolist()
    # down = (0, 0, -1): dot = -u_z, |cross| = hypot(u_x, u_y)
    return math.atan2(math.hypot(ux, uy), -uz)


def integrate_gyro(R_prev, omega, dt):
    """Propagate ``R_prev`` by a body-frame angular velocity held over ``dt``.

    ``R_next = R_prev @ exp([omega * dt]x)`` (exact Rodrigues step).
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    omega = np.asarray(omega, dtype=float)
    if not np.any(omega):
        return np.array(R_prev, dtype=float, copy=True)
    return R_prev @ matrix_from_rotvec(omega * dt)
