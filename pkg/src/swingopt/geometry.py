"""Rotation and quaternion helpers.

Quaternions are stored as (w, x, y, z) and map body frame to world frame:
v_world = rot_matrix(q) @ v_body.  Angular velocities are expressed in the
world frame throughout the package.
"""

import numpy as np


def skew(v):
    """Cross-product matrix: skew(v) @ u == cross(v, u)."""
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def axis_angle(axis, angle):
    """Rotation matrix about a unit axis (Rodrigues)."""
    c = np.cos(angle)
    s = np.sin(angle)
    K = skew(axis)
    return np.eye(3) + s * K + (1.0 - c) * (K @ K)


def rpy_matrix(roll, pitch, yaw):
    """Intrinsic XYZ rotation: Rx(roll) @ Ry(pitch) @ Rz(yaw)."""
    cr, sr = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    Rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    Ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    Rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return Rx @ Ry @ Rz


def quat_normalize(q):
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n == 0.0:
        raise ValueError("cannot normalize zero quaternion")
    return q / n


def quat_multiply(a, b):
    """Hamilton product a ⊗ b, both (w, x, y, z)."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_to_matrix(q):
    """Body-to-world rotation matrix of a unit quaternion."""
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quat_from_axis_angle(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    half = 0.5 * angle
    q = np.empty(4)
    q[0] = np.cos(half)
    q[1:] = np.sin(half) * axis
    return q


def quat_rate(q, omega_world):
    """Quaternion time derivative for a world-frame angular velocity.

    q̇ = 0.5 * (0, ω) ⊗ q, consistent with Ṙ = skew(ω) R for R = rot(q).
    """
    w = np.array([0.0, omega_world[0], omega_world[1], omega_world[2]])
    return 0.5 * quat_multiply(w, q)


def quat_rotation_angle(q):
    """Geodesic rotation angle of a unit quaternion, in [0, pi]."""
    v = np.linalg.norm(q[1:])
    return 2.0 * np.arctan2(v, abs(q[0]))


def rotation_log(R):
    """Rotation vector (axis * angle) of a rotation matrix."""
    s = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    sin_a = 0.5 * np.linalg.norm(s)
    cos_a = 0.5 * (np.trace(R) - 1.0)
    # arctan2 of the skew norm stays well conditioned where arccos of the
    # trace does not (angle near 0 or pi)
    angle = np.arctan2(sin_a, cos_a)
    if angle < 1e-12:
        return 0.5 * s
    if np.pi - angle < 1e-6:
        # near pi: extract axis from the symmetric part
        A = 0.5 * (R + np.eye(3))
        axis = np.sqrt(np.maximum(np.diag(A) - 0.5 * (np.trace(A) - 1.0), 0.0))
        # fix signs from off-diagonals
        i = int(np.argmax(axis))
        if axis[i] > 0:
            for j in range(3):
                if j != i and A[i, j] < 0:
                    axis[j] = -axis[j]
        n = np.linalg.norm(axis)
        if n > 0:
            axis = axis / n
        # overall sign from the skew part, 2 sin(angle) * axis, which stays
        # directionally reliable until angle reaches pi exactly
        if s @ axis < 0:
            axis = -axis
        return angle * axis
    return angle / (2.0 * sin_a) * s
