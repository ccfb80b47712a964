"""Kinematics and centroidal-momentum operations on a RobotModel.

All quantities use the package conventions from geometry: quaternions are
(w, x, y, z) body-to-world, angular velocities are world frame, and the
floating base is pinned at the world origin (momentum about the CoM never
depends on where the base sits, so translation is not modeled).
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .geometry import quat_to_matrix
from .robot import CentroidalMap, RobotModel


@dataclass(frozen=True)
class FramePoses:
    """World pose of every link and end-effector frame, base at the origin."""

    links: dict
    end_effectors: dict

    def position(self, name):
        if name in self.links:
            return self.links[name][1]
        if name in self.end_effectors:
            return self.end_effectors[name][1]
        raise KeyError(f"unknown frame {name!r}")


def _fk_arrays(model, base_orientation, q):
    pk = model.packed
    q = model.check_q(q)
    quat = model.check_base_orientation(base_orientation)
    R = np.empty((pk.nb, 3, 3))
    P = np.empty((pk.nb, 3))
    K._fk(pk.parent, pk.jrot, pk.jtrans, pk.jaxis, pk.qidx, quat_to_matrix(quat), q, R, P)
    return pk, q, R, P


def forward_kinematics(model: RobotModel, base_orientation, q) -> FramePoses:
    """World rotation and position of every link and end-effector frame."""
    pk, q, R, P = _fk_arrays(model, base_orientation, q)
    links = {name: (R[i].copy(), P[i].copy()) for i, (name, _) in enumerate(model.links)}
    ees = {}
    for frame, body in pk.ee_body.items():
        off = pk.ee_offset[frame]
        ees[frame] = (R[body].copy(), P[body] + R[body] @ off)
    return FramePoses(links=links, end_effectors=ees)


def com_position(model: RobotModel, base_orientation, q) -> np.ndarray:
    """Mass-weighted average of link CoM positions, world frame."""
    pk, q, R, P = _fk_arrays(model, base_orientation, q)
    pc = np.empty((pk.nb, 3))
    pg = np.empty(3)
    K._body_coms(R, P, pk.com, pc)
    K._com_point(pk.mass, pc, pg)
    return pg


def compute_centroidal_map(model: RobotModel, base_orientation, q) -> CentroidalMap:
    """Momentum map at one configuration, with its column blocks split out."""
    pk, q, R, P = _fk_arrays(model, base_orientation, q)
    pc = np.empty((pk.nb, 3))
    pg = np.empty(3)
    K._body_coms(R, P, pk.com, pc)
    K._com_point(pk.mass, pc, pg)
    lin = np.empty((3, 6 + pk.nq))
    ang_bl = np.empty((3, 3))
    ang_ba = np.empty((3, 3))
    ang_j = np.empty((3, pk.nq))
    icom = np.empty((3, 3))
    K._full_momentum_map(
        pk.parent, pk.jaxis, pk.qidx, pk.jbody, pk.subtree, R, P, pc, pk.mass, pk.inertia, pg,
        lin, ang_bl, ang_ba, ang_j, icom,
    )
    return CentroidalMap(
        lin=lin, ang_base_lin=ang_bl, ang_base_ang=ang_ba, ang_joint=ang_j,
        com=pg, inertia_com=icom,
    )


def momentum_from_velocities(model: RobotModel, base_orientation, q, v_base, omega_base, qdot):
    """Momentum about the CoM by per-body velocity propagation.

    A second, structurally different route to the same quantity as
    CentroidalMap.momentum; the two agreeing is the model sanity check run
    by the CLI.
    """
    pk, q, R, P = _fk_arrays(model, base_orientation, q)
    qdot = np.asarray(qdot, dtype=float).reshape(pk.nq)
    pc = np.empty((pk.nb, 3))
    pg = np.empty(3)
    K._body_coms(R, P, pk.com, pc)
    K._com_point(pk.mass, pc, pg)
    w = np.empty((pk.nb, 3))
    vo = np.empty((pk.nb, 3))
    K._tree_velocities(
        pk.parent, pk.jaxis, pk.qidx, R, P,
        np.asarray(v_base, dtype=float).reshape(3),
        np.asarray(omega_base, dtype=float).reshape(3), qdot, w, vo,
    )
    l = np.empty(3)
    k = np.empty(3)
    dummy = np.empty((1, 3))
    K._momentum_sum(R, P, pc, pk.mass, pk.inertia, pg, w, vo, l, k, dummy, False)
    return l, k


def rotational_coupling_residual(model: RobotModel, base_orientation, q):
    """Check that the base-rotation block equals the rotated composite inertia.

    The block mapping base angular velocity to angular momentum should equal
    the composite inertia about the CoM conjugated into world axes.  Returns
    (relative Frobenius residual, smallest singular value of the block),
    with the reference side computed from an independent identity-orientation
    pass so the comparison is not self-fulfilling.
    """
    cmap = compute_centroidal_map(model, base_orientation, q)
    # reference: composite inertia in base axes from an identity-orientation
    # FK, conjugated by the base rotation
    pk, q, R, P = _fk_arrays(model, np.array([1.0, 0.0, 0.0, 0.0]), q)
    pc = np.empty((pk.nb, 3))
    pg = np.empty(3)
    K._body_coms(R, P, pk.com, pc)
    K._com_point(pk.mass, pc, pg)
    icom_base = np.empty((3, 3))
    K._composite_inertia(R, pc, pk.mass, pk.inertia, pg, icom_base)
    Rb = quat_to_matrix(model.check_base_orientation(base_orientation))
    reference = Rb @ icom_base @ Rb.T
    A = cmap.ang_base_ang
    residual = np.linalg.norm(A - reference) / np.linalg.norm(A)
    min_singular = np.linalg.svd(A, compute_uv=False)[-1]
    return residual, min_singular


def point_jacobian(model: RobotModel, base_orientation, q, frame) -> np.ndarray:
    """World linear velocity of a frame origin as a function of (v_b, w_b, qdot)."""
    pk, q, R, P = _fk_arrays(model, base_orientation, q)
    if frame in pk.ee_body:
        body = pk.ee_body[frame]
        point = P[body] + R[body] @ pk.ee_offset[frame]
    else:
        names = [name for name, _ in model.links]
        if frame not in names:
            raise KeyError(f"unknown frame {frame!r}")
        body = names.index(frame)
        point = P[body].copy()
    J = np.zeros((3, 6 + pk.nq))
    J[:, :3] = np.eye(3)
    # w x p = -S(p) w
    px, py, pz = point
    J[:, 3:6] = np.array([[0.0, pz, -py], [-pz, 0.0, px], [py, -px, 0.0]])
    b = body
    while b > 0:
        k = pk.qidx[b]
        if k >= 0:
            axis = R[b] @ pk.jaxis[b]
            J[:, 6 + k] = np.cross(axis, point - P[b])
        b = pk.parent[b]
    return J
