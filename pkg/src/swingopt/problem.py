"""Limb-swing optimization for minimal touchdown orientation.

Assembles the flight-phase problem: decision variables are the polynomial
coefficients of the significant joints, the cost is the rotation angle of
the integrated touchdown orientation, and 14 scalar equality constraints
pin the foot geometry:

    stance-foot touchdown position relative to CoM   (3)
    swing-foot liftoff position relative to CoM      (3)
    stance-foot touchdown velocity relative to CoM   (3)
    swing-foot liftoff world velocity                (3)
    stance-foot liftoff ground clearance             (1)
    swing-foot touchdown ground clearance            (1)

"Stance" is the leg about to touch down, "swing" the one that just left
the ground.  The ground datum is the liftoff contact: the swing-foot
liftoff target height for the liftoff clearance, the stance touchdown
target height for the touchdown clearance.

Every quantity needed by the cost and constraints comes from one of two
kernel evaluations per candidate x: a liftoff snapshot (no integration)
and a terminal integration sweep.  Both are memoized on the exact bytes of
x, so the solver's repeated probing of the same point (14 constraints plus
the cost share gradient probe points) costs one kernel call each.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .flight import FlightInitialState, integrate_orientation
from .geometry import quat_normalize, quat_rotation_angle
from .poly import FreeVariableLayout, TrajectoryMatrix, significant_layout, unpack
from .robot import RobotModel
from .solver import ProblemFunctions, SolverOptions, solve


@dataclass(frozen=True)
class FlightProblem:
    """One flight-phase optimization instance.

    Targets are expressed relative to the CoM (stance at touchdown, swing
    at liftoff); clearances are heights above the ground datum.
    q_liftoff_hold supplies the constant angle of every frozen joint (and
    the start of nothing else: significant joints are free).  With
    literal_swing_anchor the swing liftoff position is anchored to the
    touchdown CoM instead of the liftoff CoM.
    """

    model: RobotModel
    t_f: float
    theta0: np.ndarray
    omega0: np.ndarray
    v_com_liftoff: np.ndarray
    p_stance_td_target: np.ndarray
    p_swing_lo_target: np.ndarray
    h_stance: float
    h_swing: float
    N: int = 11
    degree: int = 3
    q_liftoff_hold: np.ndarray = None
    stance_foot: str = "foot_left"
    swing_foot: str = "foot_right"
    literal_swing_anchor: bool = False
    normalized_time: bool = False

    def __post_init__(self):
        if not self.t_f > 0:
            raise ValueError(f"flight time must be positive, got {self.t_f}")
        if self.h_stance < 0 or self.h_swing < 0:
            raise ValueError("clearances must be non-negative")
        if self.N < 2:
            raise ValueError(f"need at least 2 integration samples, got N={self.N}")
        if self.degree < 1:
            raise ValueError(f"polynomial degree must be at least 1, got {self.degree}")
        theta0 = quat_normalize(np.asarray(self.theta0, dtype=float))
        if abs(np.linalg.norm(np.asarray(self.theta0, dtype=float)) - 1.0) > 1e-9:
            raise ValueError("liftoff orientation quaternion is not normalized")
        object.__setattr__(self, "theta0", theta0)
        for name in ("omega0", "v_com_liftoff", "p_stance_td_target", "p_swing_lo_target"):
            val = np.asarray(getattr(self, name), dtype=float)
            if val.shape != (3,):
                raise ValueError(f"{name} must be a 3-vector, got shape {val.shape}")
            object.__setattr__(self, name, val)
        hold = self.q_liftoff_hold
        hold = np.zeros(self.model.n) if hold is None else np.asarray(hold, dtype=float)
        if hold.shape != (self.model.n,):
            raise ValueError(f"q_liftoff_hold must have {self.model.n} entries")
        object.__setattr__(self, "q_liftoff_hold", hold)
        for foot in (self.stance_foot, self.swing_foot):
            if foot not in self.model.end_effectors:
                raise ValueError(f"model has no end effector {foot!r}")
        if self.stance_foot == self.swing_foot:
            raise ValueError("stance and swing feet must differ")
        _check_reachable(self.model, self.stance_foot, self.p_stance_td_target, hold)
        _check_reachable(self.model, self.swing_foot, self.p_swing_lo_target, hold)

    def layout(self) -> FreeVariableLayout:
        return significant_layout(self.model, self.degree, self.normalized_time)

    def initial_state(self) -> FlightInitialState:
        return FlightInitialState(self.theta0, self.omega0)


def _check_reachable(model: RobotModel, foot: str, target: np.ndarray, q_hold: np.ndarray):
    """Reject targets beyond 98% of the leg's stretched length.

    The leg root is the first revolute joint on the base-to-foot chain;
    reach is the summed segment length from there to the foot frame,
    compared against the target's distance from the root at the hold pose.
    """
    packed = model.packed
    link, offset = model.end_effectors[foot]
    body = dict((name, i) for i, (name, _) in enumerate(model.links))[link]
    chain = []
    b = body
    while b != 0:
        chain.append(b)
        b = int(packed.parent[b])
    chain.reverse()
    revolute = [b for b in chain if packed.qidx[b] >= 0]
    if not revolute:
        return
    root = revolute[0]
    reach = float(np.linalg.norm(offset))
    seen_root = False
    for b in chain:
        if b == root:
            seen_root = True
            continue
        if seen_root:
            reach += float(np.linalg.norm(packed.jtrans[b]))
    from .rbd import com_position, forward_kinematics

    theta_id = np.array([1.0, 0.0, 0.0, 0.0])
    poses = forward_kinematics(model, theta_id, q_hold)
    pg = com_position(model, theta_id, q_hold)
    root_name = model.links[root][0]
    root_pos = poses.links[root_name][1]
    dist = float(np.linalg.norm((pg + target) - root_pos))
    if dist > 0.98 * reach:
        raise ValueError(
            f"target for {foot!r} is unreachable: {dist:.3f} m from the leg root "
            f"exceeds 98% of the {reach:.3f} m leg length"
        )


class _Evaluators:
    """Memoized fused-kernel evaluation shared by the cost and constraints.

    One kernel pass per distinct variable vector produces everything the
    cost and all 14 residuals read (liftoff snapshot plus terminal flight
    data) as a 28-value row.  Rows are cached on the raw bytes of x, so
    the scalar closures and repeated finite-difference probes collapse to
    dictionary hits, and prefetch() evaluates a whole stack of probe
    points in a single kernel call.
    """

    def __init__(self, problem: FlightProblem, layout: FreeVariableLayout):
        self.problem = problem
        self.layout = layout
        packed = problem.model.packed
        self.packed = packed
        self.stance_body, self.stance_off = packed.ee_body[problem.stance_foot], packed.ee_offset[problem.stance_foot]
        self.swing_body, self.swing_off = packed.ee_body[problem.swing_foot], packed.ee_offset[problem.swing_foot]
        rows = np.array([rc[0] for rc in layout.cells], dtype=np.int64)
        cols = np.array([rc[1] for rc in layout.cells], dtype=np.int64)
        self._rows, self._cols = rows, cols
        self._scale_vec = layout._scales(problem.t_f)
        base = np.zeros((layout.n, layout.degree + 1))
        covered = np.zeros(layout.n, dtype=bool)
        covered[rows] = True
        base[~covered, layout.degree] = problem.q_liftoff_hold[~covered]
        self._base_gamma = base
        self._ws = _kernels.make_workspace(packed.nb, packed.nq)
        self._g1 = np.empty((1, layout.n, layout.degree + 1))
        self._out1 = np.empty((1, 28))
        self._row_cache = {}
        self._res_cache = {}
        self._cost_cache = {}
        self.kernel_calls = 0

    def _batch_eval(self, gammas, out):
        pk, pr = self.packed, self.problem
        _kernels._residual_batch(
            pk.parent, pk.jrot, pk.jtrans, pk.jaxis,
            pk.jaxis_kind, pk.jaxis_sign, pk.jrot_ident, pk.qidx,
            pk.mass, pk.com, pk.inertia,
            pr.theta0, pr.omega0, gammas, pr.t_f, pr.N,
            self.stance_body, self.stance_off,
            self.swing_body, self.swing_off,
            *self._ws, out,
        )
        self.kernel_calls += gammas.shape[0]

    def _fill_gamma(self, x, g):
        g[:] = self._base_gamma
        g[self._rows, self._cols] = x / self._scale_vec

    def _trim(self):
        if len(self._row_cache) > 1 << 16:
            self._row_cache.clear()
            self._res_cache.clear()
            self._cost_cache.clear()

    def row(self, x):
        key = x.tobytes()
        hit = self._row_cache.get(key)
        if hit is None:
            self._fill_gamma(x, self._g1[0])
            self._batch_eval(self._g1, self._out1)
            hit = self._out1[0].copy()
            self._trim()
            self._row_cache[key] = hit
        return hit

    def prefetch(self, points):
        """Evaluate any uncached probe points in one batched kernel call."""
        points = np.ascontiguousarray(points, dtype=float)
        cache = self._row_cache
        missing = []
        keys = []
        for i in range(points.shape[0]):
            k = points[i].tobytes()
            if k not in cache:
                missing.append(i)
                keys.append(k)
        if not missing:
            return
        sel = points[missing]
        gammas = np.broadcast_to(
            self._base_gamma, (len(missing),) + self._base_gamma.shape
        ).copy()
        gammas[:, self._rows, self._cols] = sel / self._scale_vec
        out = np.empty((len(missing), 28))
        self._batch_eval(gammas, out)
        res = np.empty((len(missing), 14))
        self._residual_matrix(out, res)
        self._trim()
        rcache = self._res_cache
        for j, k in enumerate(keys):
            cache[k] = out[j]
            rcache[k] = res[j]

    def cost(self, x):
        key = x.tobytes()
        hit = self._cost_cache.get(key)
        if hit is None:
            hit = float(quat_rotation_angle(self.row(x)[0:4]))
            self._cost_cache[key] = hit
        return hit

    def residual_vector(self, x):
        """All 14 residuals at x; callers must treat the array as read-only."""
        key = x.tobytes()
        hit = self._res_cache.get(key)
        if hit is None:
            hit = self._residuals_from_row(self.row(x))
            self._res_cache[key] = hit
        return hit

    def residual_batch(self, points):
        """Residual rows for a (k, p) stack of points in one kernel pass.

        Rows agree bitwise with residual_vector on each point; results
        land in the caches so later scalar probes at the same points are
        dictionary hits.
        """
        points = np.ascontiguousarray(points, dtype=float)
        rcache = self._res_cache
        result = np.empty((points.shape[0], 14))
        missing = []
        keys = []
        for i in range(points.shape[0]):
            k = points[i].tobytes()
            hit = rcache.get(k)
            if hit is None:
                missing.append(i)
                keys.append(k)
            else:
                result[i] = hit
        if missing:
            sel = points[missing]
            gammas = np.broadcast_to(
                self._base_gamma, (len(missing),) + self._base_gamma.shape
            ).copy()
            gammas[:, self._rows, self._cols] = sel / self._scale_vec
            out = np.empty((len(missing), 28))
            self._batch_eval(gammas, out)
            res = np.empty((len(missing), 14))
            self._residual_matrix(out, res)
            self._trim()
            cache = self._row_cache
            for j, k in enumerate(keys):
                cache[k] = out[j]
                rcache[k] = res[j]
            result[missing] = res
        return result

    def residual_vector_gamma(self, gamma):
        gammas = np.ascontiguousarray(gamma, dtype=float)[None]
        out = np.empty((1, 28))
        self._batch_eval(gammas, out)
        return self._residuals_from_row(out[0])

    def _residuals_from_row(self, row):
        out = np.empty(14)
        self._residual_matrix(row[None], out[None])
        return out

    def _residual_matrix(self, rows, out):
        """Residual rows for a stack of kernel rows (vectorized over axis 0)."""
        pr = self.problem
        out[:, 0:3] = rows[:, 16:19] - pr.p_stance_td_target
        if pr.literal_swing_anchor:
            out[:, 3:6] = (rows[:, 4:7] + rows[:, 13:16]) - rows[:, 25:28] - pr.p_swing_lo_target
        else:
            out[:, 3:6] = rows[:, 4:7] - pr.p_swing_lo_target
        out[:, 6:9] = rows[:, 19:22]
        out[:, 9:12] = rows[:, 7:10] + pr.v_com_liftoff
        out[:, 12] = rows[:, 12] - (pr.p_swing_lo_target[2] + pr.h_stance)
        out[:, 13] = rows[:, 24] - (pr.p_stance_td_target[2] + pr.h_swing)

    def constraint_functions(self):
        """The 14 residuals as scalar closures in canonical order."""
        pr = self.problem
        row = self.row
        td = pr.p_stance_td_target
        lo = pr.p_swing_lo_target
        vcom = pr.v_com_liftoff

        def stance_td_pos(a):
            def c(x):
                return row(x)[16 + a] - td[a]
            return c

        def swing_lo_pos(a):
            if pr.literal_swing_anchor:
                def c(x):
                    r = row(x)
                    return r[4 + a] + r[13 + a] - r[25 + a] - lo[a]
                return c

            def c(x):
                return row(x)[4 + a] - lo[a]
            return c

        def stance_td_vel(a):
            def c(x):
                return row(x)[19 + a]
            return c

        def swing_lo_vel(a):
            def c(x):
                return row(x)[7 + a] + vcom[a]
            return c

        def stance_lo_clearance(x):
            return row(x)[12] - (lo[2] + pr.h_stance)

        def swing_td_clearance(x):
            return row(x)[24] - (td[2] + pr.h_swing)

        funcs = []
        funcs.extend(stance_td_pos(a) for a in range(3))
        funcs.extend(swing_lo_pos(a) for a in range(3))
        funcs.extend(stance_td_vel(a) for a in range(3))
        funcs.extend(swing_lo_vel(a) for a in range(3))
        funcs.append(stance_lo_clearance)
        funcs.append(swing_td_clearance)
        return funcs


CONSTRAINT_NAMES = (
    "stance_td_pos_x", "stance_td_pos_y", "stance_td_pos_z",
    "swing_lo_pos_x", "swing_lo_pos_y", "swing_lo_pos_z",
    "stance_td_vel_x", "stance_td_vel_y", "stance_td_vel_z",
    "swing_lo_vel_x", "swing_lo_vel_y", "swing_lo_vel_z",
    "stance_lo_clearance", "swing_td_clearance",
)


def flight_cost(problem: FlightProblem, x: np.ndarray) -> float:
    """Rotation angle (radians) of the touchdown orientation for variables x."""
    ev = _Evaluators(problem, problem.layout())
    return float(ev.cost(np.asarray(x, dtype=float)))


def constraint_residuals(problem: FlightProblem, x: np.ndarray) -> np.ndarray:
    """All 14 residuals in canonical order at variables x."""
    ev = _Evaluators(problem, problem.layout())
    return ev.residual_vector(np.asarray(x, dtype=float))


def optimize_flight(problem: FlightProblem, options: SolverOptions = None,
                    n_verify: int = 1001, x0: np.ndarray = None):
    """Solve the limb-swing problem and verify at high resolution.

    Starts from zero polynomials (hold constants on frozen joints) unless a
    warm start x0 is given.  Returns (SolveResult, TrajectoryMatrix,
    FlightLog) where the log is re-integrated at n_verify samples.
    """
    layout = problem.layout()
    ev = _Evaluators(problem, layout)
    funcs = ProblemFunctions(
        cost=ev.cost,
        constraints=ev.constraint_functions(),
        prefetch=ev.prefetch,
        residual_vector=ev.residual_vector,
        residual_matrix=ev.residual_batch,
    )
    if x0 is None:
        x0 = np.zeros(layout.p)
    else:
        x0 = np.asarray(x0, dtype=float)
        if x0.shape != (layout.p,):
            raise ValueError(f"warm start has shape {x0.shape}, expected ({layout.p},)")
    result = solve(funcs, x0, options)
    traj = unpack(result.x_star, layout, problem.q_liftoff_hold, problem.t_f)
    _, _, log = integrate_orientation(
        problem.model, problem.initial_state(), traj, problem.t_f, n_verify
    )
    return result, traj, log


@dataclass(frozen=True)
class PlaybackReport:
    """Verification-resolution summary of one solved flight."""

    touchdown_angle: float
    theta_tf: np.ndarray
    omega_tf: np.ndarray
    residuals: np.ndarray
    momentum_drift: float
    limb_peak_sagittal: dict
    torso_peak_sagittal: float
    n_verify: int

    def lines(self):
        out = [
            f"touchdown orientation angle: {self.touchdown_angle:.6f} rad",
            f"touchdown quaternion (w,x,y,z): {np.array2string(self.theta_tf, precision=6)}",
            f"touchdown body rate (rad/s): {np.array2string(self.omega_tf, precision=6)}",
            f"momentum conservation drift: {self.momentum_drift:.3e}",
            f"verification samples: {self.n_verify}",
            "constraint residuals at verification resolution:",
        ]
        for name, val in zip(CONSTRAINT_NAMES, self.residuals):
            out.append(f"  {name}: {val: .3e}")
        out.append("peak |sagittal momentum| by limb (N m s):")
        for limb, peak in self.limb_peak_sagittal.items():
            out.append(f"  {limb}: {peak:.4f}")
        out.append(f"  torso (remainder): {self.torso_peak_sagittal:.4f}")
        return out

    def text(self):
        return "\n".join(self.lines()) + "\n"


def playback(model: RobotModel, problem: FlightProblem, traj: TrajectoryMatrix,
             n_verify: int = 1001):
    """Re-integrate a trajectory at high resolution and report the landing.

    Returns (FlightLog, PlaybackReport): touchdown orientation, the 14
    residuals re-evaluated at n_verify integration samples, momentum drift
    of the independently recomputed momentum, and per-limb peak sagittal
    momentum shares.
    """
    if abs(traj.t_f - problem.t_f) > 1e-12 * max(problem.t_f, 1.0):
        raise ValueError(
            f"trajectory horizon {traj.t_f} does not match problem flight time {problem.t_f}"
        )
    theta_tf, omega_tf, log = integrate_orientation(
        model, problem.initial_state(), traj, problem.t_f, n_verify
    )
    verify_problem = replace(problem, N=n_verify) if n_verify != problem.N else problem
    ev = _Evaluators(verify_problem, verify_problem.layout())
    residuals = ev.residual_vector_gamma(traj.gamma)
    drift = float(np.max(np.linalg.norm(log.k - log.k_flight, axis=1)))
    limb_peak = {
        limb: float(np.max(np.abs(log.limb_k[limb][:, 1]))) for limb in log.limb_k
    }
    torso_peak = float(np.max(np.abs(log.torso_k[:, 1])))
    report = PlaybackReport(
        touchdown_angle=float(quat_rotation_angle(theta_tf)),
        theta_tf=theta_tf,
        omega_tf=omega_tf,
        residuals=residuals,
        momentum_drift=drift,
        limb_peak_sagittal=limb_peak,
        torso_peak_sagittal=torso_peak,
        n_verify=n_verify,
    )
    return log, report
