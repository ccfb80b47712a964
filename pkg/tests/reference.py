"""Independent reference implementations used as test oracles.

Everything here recomputes quantities from first principles with scipy
rotations and finite differences, sharing no code with the package's
kinematics or momentum routines.
"""

import numpy as np
from scipy.spatial.transform import Rotation


def rot_wxyz(q):
    """scipy Rotation from a (w, x, y, z) quaternion."""
    return Rotation.from_quat(np.asarray(q, dtype=float), scalar_first=True)


def ref_fk(model, quat, q):
    """World rotation and position of every link, base at the origin.

    Returns (R, P) dicts keyed by link name, computed by walking the tree
    with scipy rotations.
    """
    q = np.asarray(q, dtype=float)
    R = {}
    P = {}
    base = model.links[0][0]
    R[base] = rot_wxyz(quat).as_matrix()
    P[base] = np.zeros(3)
    joint_of = {j.child: j for j in model.joints}
    qidx = {name: i for i, name in enumerate(model.joint_names)}
    for link_name, _ in model.links[1:]:
        j = joint_of[link_name]
        Rp, Pp = R[j.parent], P[j.parent]
        P[link_name] = Pp + Rp @ j.translation
        frame = Rp @ j.rotation
        if j.kind == "revolute":
            frame = frame @ Rotation.from_rotvec(q[qidx[j.name]] * j.axis).as_matrix()
        R[link_name] = frame
    return R, P


def ref_frame_position(model, quat, q, frame):
    """World position of an end-effector frame or link origin."""
    R, P = ref_fk(model, quat, q)
    if frame in model.end_effectors:
        link, offset = model.end_effectors[frame]
        return P[link] + R[link] @ offset
    return P[frame]


def ref_com(model, quat, q):
    R, P = ref_fk(model, quat, q)
    total = 0.0
    acc = np.zeros(3)
    for link_name, si in model.links:
        total += si.mass
        acc += si.mass * (P[link_name] + R[link_name] @ si.com_offset)
    return acc / total


def _advance(model, quat, q, omega, qdot, t):
    """Pose advanced by t under world rate omega and joint rates qdot."""
    Rb = Rotation.from_rotvec(np.asarray(omega, dtype=float) * t) * rot_wxyz(quat)
    quat_t = Rb.as_quat(scalar_first=True)
    return quat_t / np.linalg.norm(quat_t), np.asarray(q, dtype=float) + t * np.asarray(qdot, dtype=float)


def ref_body_rates_fd(model, quat, q, omega, qdot, h=1e-6):
    """Per-body world angular velocity and CoM-point velocity by central FD."""
    qp, jp = _advance(model, quat, q, omega, qdot, h)
    qm, jm = _advance(model, quat, q, omega, qdot, -h)
    Rp, Pp = ref_fk(model, qp, jp)
    Rm, Pm = ref_fk(model, qm, jm)
    R0, _ = ref_fk(model, quat, q)
    w = {}
    v = {}
    for link_name, si in model.links:
        dR = (Rp[link_name] - Rm[link_name]) / (2.0 * h)
        S = dR @ R0[link_name].T
        w[link_name] = np.array([S[2, 1] - S[1, 2], S[0, 2] - S[2, 0], S[1, 0] - S[0, 1]]) / 2.0
        cp = Pp[link_name] + Rp[link_name] @ si.com_offset
        cm = Pm[link_name] + Rm[link_name] @ si.com_offset
        v[link_name] = (cp - cm) / (2.0 * h)
    return w, v


def ref_momentum(model, quat, q, omega, qdot, v_base=None, h=1e-6):
    """(linear, angular-about-CoM) momentum from per-body FD velocities."""
    w, v = ref_body_rates_fd(model, quat, q, omega, qdot, h)
    if v_base is not None:
        v = {name: vel + np.asarray(v_base, dtype=float) for name, vel in v.items()}
    R, P = ref_fk(model, quat, q)
    pg = ref_com(model, quat, q)
    l = np.zeros(3)
    k = np.zeros(3)
    for link_name, si in model.links:
        ci = P[link_name] + R[link_name] @ si.com_offset
        Iw = R[link_name] @ si.inertia_about_com @ R[link_name].T
        l += si.mass * v[link_name]
        k += Iw @ w[link_name] + si.mass * np.cross(ci - pg, v[link_name])
    return l, k


def ref_coupling_matrix(model, quat, q):
    """Base-rotation momentum coupling, column by column from the FD oracle."""
    A = np.empty((3, 3))
    zero = np.zeros(model.n)
    for col, unit in enumerate(np.eye(3)):
        _, k = ref_momentum(model, quat, q, unit, zero)
        A[:, col] = k
    return A


def ref_kkt_qp(Q, c, A, b):
    """Minimizer of 1/2 x^T Q x + c^T x subject to A x = b via the KKT system."""
    p = Q.shape[0]
    k = A.shape[0]
    kkt = np.zeros((p + k, p + k))
    kkt[:p, :p] = Q
    kkt[:p, p:] = A.T
    kkt[p:, :p] = A
    rhs = np.concatenate([-c, b])
    sol = np.linalg.solve(kkt, rhs)
    return sol[:p]


def cubic_boundary_fit(q0, qd0, qf, qdf, t_f):
    """Per-joint cubic coefficients hitting endpoint positions and rates.

    Returns gamma with column j holding the coefficient of t^(3-j), the
    layout TrajectoryMatrix uses for degree 3.
    """
    q0 = np.atleast_1d(np.asarray(q0, dtype=float))
    n = q0.shape[0]
    gamma = np.empty((n, 4))
    M = np.array([
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
        [t_f ** 3, t_f ** 2, t_f, 1.0],
        [3.0 * t_f ** 2, 2.0 * t_f, 1.0, 0.0],
    ])
    rhs = np.stack([q0, np.atleast_1d(qd0), np.atleast_1d(qf), np.atleast_1d(qdf)], axis=0)
    gamma[:] = np.linalg.solve(M, rhs).T
    return gamma
