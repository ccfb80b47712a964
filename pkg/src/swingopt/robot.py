"""Kinematic tree model types.

A robot is a tree of rigid bodies rooted at a floating base.  Every non-base
body is attached to its parent by a revolute or fixed joint; end-effector
frames (feet, hands) are named points on bodies.  The base position is never
represented: the angular dynamics of the system is independent of base
translation, so all world-frame quantities are expressed with the base
origin pinned at zero.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import quat_normalize

REVOLUTE = "revolute"
FIXED = "fixed"

SIGNIFICANT = "significant"
FROZEN = "frozen"


class ModelError(ValueError):
    """Raised for structurally or physically invalid models."""


@dataclass(frozen=True)
class SpatialInertia:
    """Mass, CoM offset and rotational inertia of one rigid body.

    The inertia tensor is given about the body's own CoM, in the body frame.
    mass == 0 marks a massless frame (inertia must then vanish).
    """

    mass: float
    com_offset: np.ndarray
    inertia_about_com: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "com_offset", np.asarray(self.com_offset, dtype=float).reshape(3))
        object.__setattr__(
            self, "inertia_about_com", np.asarray(self.inertia_about_com, dtype=float).reshape(3, 3)
        )
        if self.mass < 0:
            raise ModelError(f"negative mass {self.mass}")
        I = self.inertia_about_com
        if not np.allclose(I, I.T, atol=1e-9):
            raise ModelError("inertia tensor is not symmetric")
        if self.mass == 0.0:
            if np.any(np.abs(I) > 1e-12):
                raise ModelError("massless frame with nonzero inertia")
            return
        lam = np.linalg.eigvalsh(0.5 * (I + I.T))
        scale = max(lam[-1], 1e-12)
        if lam[0] < -1e-9 * scale:
            raise ModelError(f"non-physical inertia: principal moments {lam}")
        # each principal moment bounded by the sum of the other two
        for i in range(3):
            if lam[i] > lam[(i + 1) % 3] + lam[(i + 2) % 3] + 1e-9 * scale:
                raise ModelError(f"inertia violates the principal-moment triangle bound: {lam}")

    @staticmethod
    def massless():
        return SpatialInertia(0.0, np.zeros(3), np.zeros((3, 3)))


@dataclass(frozen=True)
class JointSpec:
    """One joint of the tree: attachment transform, axis and bookkeeping."""

    name: str
    kind: str
    parent: str
    child: str
    translation: np.ndarray
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    axis: Optional[np.ndarray] = None
    significance: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float).reshape(3))
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float).reshape(3, 3))
        if self.kind not in (REVOLUTE, FIXED):
            raise ModelError(f"joint {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == REVOLUTE:
            if self.axis is None:
                raise ModelError(f"joint {self.name!r}: revolute joint needs an axis")
            ax = np.asarray(self.axis, dtype=float).reshape(3)
            n = np.linalg.norm(ax)
            if abs(n - 1.0) > 1e-6:
                raise ModelError(f"joint {self.name!r}: axis norm {n} != 1")
            object.__setattr__(self, "axis", ax / n)
            if self.significance not in (SIGNIFICANT, FROZEN):
                raise ModelError(f"joint {self.name!r}: missing significance tag")
        elif self.axis is not None:
            raise ModelError(f"joint {self.name!r}: fixed joint with an axis")


@dataclass(frozen=True)
class BaseState:
    """Floating-base orientation and velocity (world-frame angular velocity)."""

    orientation: np.ndarray
    angular_velocity: np.ndarray
    translational_velocity: Optional[np.ndarray] = None

    def __post_init__(self):
        q = np.asarray(self.orientation, dtype=float).reshape(4)
        if abs(np.linalg.norm(q) - 1.0) > 1e-12:
            raise ModelError("base orientation quaternion is not normalized")
        object.__setattr__(self, "orientation", q)
        object.__setattr__(
            self, "angular_velocity", np.asarray(self.angular_velocity, dtype=float).reshape(3)
        )
        if self.translational_velocity is not None:
            object.__setattr__(
                self,
                "translational_velocity",
                np.asarray(self.translational_velocity, dtype=float).reshape(3),
            )


class PackedModel:
    """Flat-array form of a RobotModel consumed by the numeric kernels.

    Bodies are indexed in topological order with the base at 0.  Joint j is
    the inboard joint of body jbody[j]; subtree[j, i] marks the bodies moved
    by joint j.
    """

    def __init__(self, model):
        links = model.links
        nb = len(links)
        name_to_idx = {name: i for i, (name, _) in enumerate(links)}
        self.nb = nb
        self.nq = model.n
        self.parent = np.full(nb, -1, dtype=np.int64)
        self.jrot = np.tile(np.eye(3), (nb, 1, 1))
        self.jtrans = np.zeros((nb, 3))
        self.jaxis = np.zeros((nb, 3))
        self.qidx = np.full(nb, -1, dtype=np.int64)
        self.mass = np.array([si.mass for _, si in links], dtype=float)
        self.com = np.array([si.com_offset for _, si in links], dtype=float)
        self.inertia = np.array([si.inertia_about_com for _, si in links], dtype=float)
        self.total_mass = float(self.mass.sum())

        q = 0
        self.jbody = np.zeros(self.nq, dtype=np.int64)
        for joint in model.joints:
            child = name_to_idx[joint.child]
            self.parent[child] = name_to_idx[joint.parent]
            self.jrot[child] = joint.rotation
            self.jtrans[child] = joint.translation
            if joint.kind == REVOLUTE:
                self.jaxis[child] = joint.axis
                self.qidx[child] = q
                self.jbody[q] = child
                q += 1

        self.subtree = np.zeros((self.nq, nb), dtype=np.uint8)
        for j in range(self.nq):
            root = self.jbody[j]
            for i in range(nb):
                k = i
                while k != -1:
                    if k == root:
                        self.subtree[j, i] = 1
                        break
                    k = self.parent[k]

        # fast-path classification for the flight kernels: joints whose axis
        # is exactly a coordinate axis rotate by a sparse elementary matrix,
        # and an identity joint-frame rotation skips a 3x3 multiply
        self.jaxis_kind = np.zeros(nb, dtype=np.int64)
        self.jaxis_sign = np.ones(nb)
        eye = np.eye(3)
        for b in range(nb):
            if self.qidx[b] < 0:
                continue
            for k in range(3):
                if np.array_equal(self.jaxis[b], eye[k]):
                    self.jaxis_kind[b] = k + 1
                elif np.array_equal(self.jaxis[b], -eye[k]):
                    self.jaxis_kind[b] = k + 1
                    self.jaxis_sign[b] = -1.0
        self.jrot_ident = np.array(
            [np.array_equal(self.jrot[b], eye) for b in range(nb)], dtype=np.bool_
        )

        self.ee_body = {}
        self.ee_offset = {}
        for name, (link, offset) in model.end_effectors.items():
            self.ee_body[name] = name_to_idx[link]
            self.ee_offset[name] = np.asarray(offset, dtype=float).reshape(3)

        self.body_limb = np.full(nb, -1, dtype=np.int64)
        self.limb_names = list(model.limbs)
        for li, limb in enumerate(self.limb_names):
            for link in model.limbs[limb]:
                self.body_limb[name_to_idx[link]] = li


@dataclass(frozen=True, eq=False)
class RobotModel:
    """Immutable kinematic tree with inertial data and named frames.

    links: (name, SpatialInertia) in topological order, base first.
    joints: one JointSpec per non-base link, also topological.
    end_effectors: frame name -> (link name, offset in link frame).
    limbs: limb name -> link names whose momentum is attributed to it.
    """

    links: tuple
    joints: tuple
    end_effectors: dict
    limbs: dict = field(default_factory=dict)
    name: str = "robot"

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "joints", tuple(self.joints))
        link_names = [n for n, _ in self.links]
        if len(set(link_names)) != len(link_names):
            raise ModelError("duplicate link names")
        jnames = [j.name for j in self.joints]
        if len(set(jnames)) != len(jnames):
            raise ModelError("duplicate joint names")
        if len(self.joints) != len(self.links) - 1:
            raise ModelError("joint count must be link count - 1 for a tree")
        known = {link_names[0]}
        children = set()
        for j in self.joints:
            if j.parent not in known:
                raise ModelError(
                    f"joint {j.name!r}: parent {j.parent!r} not defined before child "
                    "(links/joints must be in topological order)"
                )
            if j.child in children or j.child == link_names[0]:
                raise ModelError(f"joint {j.name!r}: link {j.child!r} has two parents")
            if j.child not in link_names:
                raise ModelError(f"joint {j.name!r}: unknown child link {j.child!r}")
            children.add(j.child)
            known.add(j.child)
        if known != set(link_names):
            raise ModelError("model is not a connected tree")
        total = sum(si.mass for _, si in self.links)
        if total <= 0:
            raise ModelError("total mass must be positive")
        for frame, (link, _) in self.end_effectors.items():
            if link not in link_names:
                raise ModelError(f"end effector {frame!r}: unknown link {link!r}")
        for limb, members in self.limbs.items():
            for link in members:
                if link not in link_names:
                    raise ModelError(f"limb {limb!r}: unknown link {link!r}")

    @property
    def n(self):
        """Number of revolute joints."""
        return sum(1 for j in self.joints if j.kind == REVOLUTE)

    @property
    def total_mass(self):
        return sum(si.mass for _, si in self.links)

    @property
    def joint_names(self):
        """Revolute joint names in generalized-coordinate order."""
        return [j.name for j in self.joints if j.kind == REVOLUTE]

    @property
    def significant_joints(self):
        return [j.name for j in self.joints if j.kind == REVOLUTE and j.significance == SIGNIFICANT]

    @property
    def frozen_joints(self):
        return [j.name for j in self.joints if j.kind == REVOLUTE and j.significance == FROZEN]

    @property
    def packed(self):
        cached = getattr(self, "_packed", None)
        if cached is None:
            cached = PackedModel(self)
            object.__setattr__(self, "_packed", cached)
        return cached

    def joint_index(self, name):
        try:
            return self.joint_names.index(name)
        except ValueError:
            raise ModelError(f"unknown revolute joint {name!r}") from None

    def check_base_orientation(self, quat):
        q = np.asarray(quat, dtype=float).reshape(4)
        n = np.linalg.norm(q)
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"base orientation quaternion norm {n} != 1")
        return quat_normalize(q)

    def check_q(self, q):
        q = np.asarray(q, dtype=float).reshape(-1)
        if q.size != self.n:
            raise ValueError(f"expected {self.n} joint angles, got {q.size}")
        return q


@dataclass(frozen=True)
class CentroidalMap:
    """Momentum map at one configuration: h = [lin; ang] from (v_b, ω_b, q̇).

    lin is the full 3×(n+6) linear-momentum block.  The angular block is
    split into its base-linear, base-angular and joint-velocity columns;
    ang_base_lin vanishes for every configuration and ang_base_ang equals the
    composite inertia about the CoM (world-aligned), which keeps it
    invertible.
    """

    lin: np.ndarray
    ang_base_lin: np.ndarray
    ang_base_ang: np.ndarray
    ang_joint: np.ndarray
    com: np.ndarray
    inertia_com: np.ndarray

    @property
    def ang(self):
        """Full 3×(n+6) angular block."""
        return np.hstack([self.ang_base_lin, self.ang_base_ang, self.ang_joint])

    def momentum(self, v_base, omega_base, qdot):
        """Apply the map to a generalized velocity."""
        nu = np.concatenate([np.asarray(v_base, float), np.asarray(omega_base, float), np.asarray(qdot, float)])
        return CentroidalState(l=self.lin @ nu, k=self.ang @ nu)


@dataclass(frozen=True)
class CentroidalState:
    """Linear and angular momentum about the CoM."""

    l: np.ndarray
    k: np.ndarray
