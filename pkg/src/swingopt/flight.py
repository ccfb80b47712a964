"""Flight-phase orientation dynamics under conserved angular momentum.

With no ground contact, gravity acts through the CoM and the angular
momentum about it is constant.  Given polynomial joint trajectories, the
base angular rate is whatever makes the total momentum equal the conserved
liftoff value:

    omega_b = coupling^{-1} (k_flight - k_joint(t))

where coupling is the composite rotational inertia about the CoM (world
axes) and k_joint is the momentum produced by joint rates alone.  The base
quaternion is advanced by explicit Euler steps of the quaternion rate with
per-step renormalization; each step recomputes the coupling at the current
pose, so limb motion feeds back into the base rotation.

Conventions: quaternions (w, x, y, z) body-to-world, angular velocities in
world axes, base translation irrelevant throughout (momentum about the CoM
is invariant to it).
"""

import io
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import quat_normalize
from .rbd import compute_centroidal_map
from .robot import CentroidalMap, RobotModel


@dataclass(frozen=True)
class FlightInitialState:
    """Base orientation/rate and joint state at the moment of liftoff.

    q0/qdot0 may be omitted when the joint state comes from a trajectory's
    t = 0 values.
    """

    theta0: np.ndarray
    omega0: np.ndarray
    q0: np.ndarray = None
    qdot0: np.ndarray = None

    def __post_init__(self):
        theta0 = np.asarray(self.theta0, dtype=float)
        if theta0.shape != (4,):
            raise ValueError(f"quaternion must have shape (4,), got {theta0.shape}")
        if abs(np.linalg.norm(theta0) - 1.0) > 1e-9:
            raise ValueError("initial orientation quaternion is not normalized")
        object.__setattr__(self, "theta0", quat_normalize(theta0))
        object.__setattr__(self, "omega0", np.asarray(self.omega0, dtype=float))
        if self.omega0.shape != (3,):
            raise ValueError(f"angular velocity must have shape (3,), got {self.omega0.shape}")
        for name in ("q0", "qdot0"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, np.asarray(val, dtype=float))

    def joint_state(self, traj=None):
        """(q0, qdot0), filled from the trajectory's t = 0 values if absent."""
        q0, qdot0 = self.q0, self.qdot0
        if q0 is None:
            if traj is None:
                raise ValueError("initial joint positions not set and no trajectory given")
            q0 = traj.eval(0.0)
        if qdot0 is None:
            if traj is None:
                raise ValueError("initial joint rates not set and no trajectory given")
            qdot0 = traj.eval_rate(0.0)
        return q0, qdot0


@dataclass(frozen=True)
class FlightLog:
    """Per-sample record of one flight integration (N+1 rows).

    k is the momentum recomputed independently at each sample from per-body
    velocities; limb_k maps each tagged limb to its share and torso_k is the
    untagged remainder (base body included), so k = torso_k + sum(limb_k).
    All momenta use the CoM-stationary convention (base translational
    velocity zero), which leaves the totals unchanged.
    """

    t: np.ndarray
    theta: np.ndarray
    omega: np.ndarray
    k: np.ndarray
    limb_k: dict
    torso_k: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    k_flight: np.ndarray
    joint_names: tuple

    @property
    def samples(self):
        return self.t.shape[0]

    def csv_header(self):
        cols = ["t", "qw", "qx", "qy", "qz", "wx", "wy", "wz", "kx", "ky", "kz"]
        for limb in self.limb_k:
            cols.extend(f"k_{limb}_{axis}" for axis in "xyz")
        cols.extend(f"q_{name}" for name in self.joint_names)
        cols.extend(f"qd_{name}" for name in self.joint_names)
        return cols

    def to_csv(self, path_or_file):
        """Write the log as CSV: t, quaternion, base rate, momentum, per-limb momentum, joint state."""
        rows = [self.t[:, None], self.theta, self.omega, self.k]
        rows.extend(self.limb_k[limb] for limb in self.limb_k)
        rows.extend([self.q, self.qdot])
        table = np.hstack(rows)
        header = ",".join(self.csv_header())
        if isinstance(path_or_file, (str, bytes)):
            with open(path_or_file, "w", encoding="utf-8") as fh:
                self._dump(fh, header, table)
        else:
            self._dump(path_or_file, header, table)

    @staticmethod
    def _dump(fh, header, table):
        fh.write(header + "\n")
        buf = io.StringIO()
        np.savetxt(buf, table, delimiter=",", fmt="%.17g")
        fh.write(buf.getvalue())


def flight_momentum(model: RobotModel, init: FlightInitialState) -> np.ndarray:
    """Angular momentum about the CoM at liftoff, conserved for the flight.

    Computed as coupling @ omega0 + joint_block @ qdot0; the base-linear
    block contributes nothing (it vanishes about the CoM), so the result is
    independent of any translational base velocity.
    """
    q0, qdot0 = init.joint_state()
    cmap = compute_centroidal_map(model, init.theta0, q0)
    return cmap.ang_base_ang @ init.omega0 + cmap.ang_joint @ qdot0


def body_rate(cmap: CentroidalMap, k_flight: np.ndarray, qdot: np.ndarray) -> np.ndarray:
    """Base angular rate that realizes the conserved momentum at this pose."""
    coupling = cmap.ang_base_ang
    sv = np.linalg.svd(coupling, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        warnings.warn(
            f"rotational coupling nearly singular (condition {sv[0] / max(sv[-1], 1e-300):.3e}); "
            "model inertia is non-physical",
            RuntimeWarning,
        )
    return np.linalg.solve(coupling, k_flight - cmap.ang_joint @ qdot)


def _limb_split(packed, per_body_k):
    """Group per-body momenta (..., nb, 3) into tagged limbs + remainder."""
    limb_k = {}
    for idx, name in enumerate(packed.limb_names):
        members = packed.body_limb == idx
        limb_k[name] = per_body_k[..., members, :].sum(axis=-2)
    torso_k = per_body_k[..., packed.body_limb < 0, :].sum(axis=-2)
    return limb_k, torso_k


def integrate_orientation(model: RobotModel, init: FlightInitialState, traj, t_f: float, N: int):
    """Integrate the base orientation across the flight phase.

    Takes N explicit Euler steps of t_f/N: advance the quaternion with the
    current rate, renormalize, recompute the momentum coupling at the new
    pose, and recover the rate from the conserved momentum.  Returns
    (theta_tf, omega_tf, FlightLog) with N+1 samples.
    """
    if N < 2:
        raise ValueError(f"need at least 2 integration samples, got N={N}")
    if abs(traj.t_f - t_f) > 1e-12 * max(t_f, 1.0):
        raise ValueError(f"trajectory horizon {traj.t_f} does not match flight time {t_f}")
    if traj.n != model.n:
        raise ValueError(f"trajectory has {traj.n} joints, model has {model.n}")
    q0, qdot0 = init.joint_state(traj)
    if init.q0 is not None and np.max(np.abs(q0 - traj.eval(0.0))) > 1e-9:
        raise ValueError("initial joint positions disagree with the trajectory at t = 0")
    if init.qdot0 is not None and np.max(np.abs(qdot0 - traj.eval_rate(0.0))) > 1e-9:
        raise ValueError("initial joint rates disagree with the trajectory at t = 0")

    packed = model.packed
    nb = packed.nb
    theta_out = np.empty((N + 1, 4))
    omega_out = np.empty((N + 1, 3))
    k_out = np.empty((N + 1, 3))
    per_body_k = np.empty((N + 1, nb, 3))
    q_out = np.empty((N + 1, model.n))
    qd_out = np.empty((N + 1, model.n))
    k_flight = _kernels._flight_log(
        packed.parent,
        packed.jrot,
        packed.jtrans,
        packed.jaxis,
        packed.qidx,
        packed.mass,
        packed.com,
        packed.inertia,
        np.ascontiguousarray(init.theta0),
        np.ascontiguousarray(init.omega0, dtype=float),
        np.ascontiguousarray(traj.gamma),
        float(t_f),
        int(N),
        theta_out,
        omega_out,
        k_out,
        per_body_k,
        q_out,
        qd_out,
    )
    limb_k, torso_k = _limb_split(packed, per_body_k)
    log = FlightLog(
        t=np.arange(N + 1) * (t_f / N),
        theta=theta_out,
        omega=omega_out,
        k=k_out,
        limb_k=limb_k,
        torso_k=torso_k,
        q=q_out,
        qdot=qd_out,
        k_flight=k_flight,
        joint_names=tuple(model.joint_names),
    )
    return theta_out[-1].copy(), omega_out[-1].copy(), log


def limb_contributions(model: RobotModel, theta, q, omega_b, qdot):
    """Split the momentum about the CoM into per-limb shares plus remainder.

    Each body's full momentum (own rotational inertia plus transport term)
    is attributed to the limb that owns the body; untagged bodies, the base
    included, form the remainder.  Shares sum exactly to the total.
    Computed in the CoM-stationary convention (zero base translational
    velocity), which does not change the total.
    """
    packed = model.packed
    nb = packed.nb
    theta = quat_normalize(np.asarray(theta, dtype=float))
    q = np.asarray(q, dtype=float)
    R = np.empty((nb, 3, 3))
    P = np.empty((nb, 3))
    pc = np.empty((nb, 3))
    w = np.empty((nb, 3))
    vo = np.empty((nb, 3))
    Rb = np.empty((3, 3))
    pg = np.empty(3)
    l = np.empty(3)
    k = np.empty(3)
    per_body = np.empty((nb, 3))
    _kernels._quat_to_mat(theta, Rb)
    _kernels._fk(packed.parent, packed.jrot, packed.jtrans, packed.jaxis, packed.qidx, Rb, q, R, P)
    _kernels._body_coms(R, P, packed.com, pc)
    _kernels._com_point(packed.mass, pc, pg)
    _kernels._tree_velocities(
        packed.parent, packed.jaxis, packed.qidx, R, P,
        np.zeros(3), np.asarray(omega_b, dtype=float), np.asarray(qdot, dtype=float), w, vo,
    )
    _kernels._momentum_sum(R, P, pc, packed.mass, packed.inertia, pg, w, vo, l, k, per_body, True)
    limb_k, torso_k = _limb_split(packed, per_body)
    return limb_k, torso_k, k
