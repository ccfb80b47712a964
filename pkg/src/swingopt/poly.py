"""Polynomial joint trajectories and the optimizer's free-variable view.

A trajectory is one degree-m polynomial per joint, stored as an n x (m+1)
coefficient matrix with columns ordered highest power first, so row i reads
[c_m ... c_1 c_0] and q_i(t) = c_m t^m + ... + c_1 t + c_0.

The optimizer only sees the rows of significant joints; frozen joints hold
a constant angle.  FreeVariableLayout records which (row, column) cells are
free and pack/unpack convert between the flat variable vector and the full
matrix.  An optional normalized-time mode rescales the free variables to
coefficients in s = t/t_f, which conditions the columns evenly for short
horizons; the stored matrix always uses raw seconds.
"""

from dataclasses import dataclass, field

import numpy as np

from ._kernels import _poly_eval, _poly_rate


@dataclass(frozen=True)
class TrajectoryMatrix:
    """Per-joint polynomial coefficients over a fixed horizon."""

    gamma: np.ndarray
    degree: int
    t_f: float

    def __post_init__(self):
        gamma = np.ascontiguousarray(np.asarray(self.gamma, dtype=float))
        object.__setattr__(self, "gamma", gamma)
        if gamma.ndim != 2 or gamma.shape[1] != self.degree + 1:
            raise ValueError(
                f"coefficient matrix shape {gamma.shape} does not match degree {self.degree}"
            )
        if not self.t_f > 0:
            raise ValueError(f"horizon t_f must be positive, got {self.t_f}")

    @property
    def n(self):
        return self.gamma.shape[0]

    def _check_time(self, t):
        slack = 1e-9 * max(self.t_f, 1.0)
        if t < -slack or t > self.t_f + slack:
            raise ValueError(f"time {t} outside trajectory horizon [0, {self.t_f}]")

    def eval(self, t: float) -> np.ndarray:
        """Joint positions at time t (Horner evaluation)."""
        self._check_time(t)
        out = np.empty(self.n)
        _poly_eval(self.gamma, float(t), out)
        return out

    def eval_rate(self, t: float) -> np.ndarray:
        """Joint velocities at time t (analytic derivative)."""
        self._check_time(t)
        out = np.empty(self.n)
        _poly_rate(self.gamma, float(t), out)
        return out

    def derivative_matrix(self) -> np.ndarray:
        """Coefficient matrix of the derivative polynomials, shape n x m."""
        m = self.degree
        powers = np.arange(m, 0, -1, dtype=float)
        return self.gamma[:, :m] * powers

    def to_json_dict(self, joint_names=None) -> dict:
        d = {
            "gamma": self.gamma.tolist(),
            "degree": self.degree,
            "t_f": self.t_f,
        }
        if joint_names is not None:
            d["joint_names"] = list(joint_names)
        return d


def traj_from_json_dict(d: dict) -> TrajectoryMatrix:
    try:
        gamma = np.array(d["gamma"], dtype=float)
        return TrajectoryMatrix(gamma, int(d["degree"]), float(d["t_f"]))
    except KeyError as e:
        raise ValueError(f"trajectory JSON missing field {e.args[0]!r}")


@dataclass(frozen=True)
class FreeVariableLayout:
    """Which coefficient cells the optimizer controls, in flat-vector order.

    cells is an ordered tuple of (joint row, coefficient column) pairs; with
    normalized_time the flat vector holds coefficients of s = t/t_f and
    pack/unpack apply the t_f^power rescaling.
    """

    n: int
    degree: int
    cells: tuple
    normalized_time: bool = False

    def __post_init__(self):
        if len(set(self.cells)) != len(self.cells):
            raise ValueError("duplicate cells in layout")
        for row, col in self.cells:
            if not (0 <= row < self.n and 0 <= col <= self.degree):
                raise ValueError(f"cell ({row}, {col}) outside an n={self.n}, degree={self.degree} matrix")

    @property
    def p(self):
        return len(self.cells)

    def _scales(self, t_f):
        # column j holds the coefficient of t^(degree-j)
        if not self.normalized_time:
            return np.ones(self.p)
        return np.array([t_f ** (self.degree - col) for _, col in self.cells])


def significant_layout(model, degree: int = 3, normalized_time: bool = False) -> FreeVariableLayout:
    """Layout exposing every coefficient of every significant joint."""
    cells = []
    names = model.joint_names
    significant = set(model.significant_joints)
    for row, name in enumerate(names):
        if name in significant:
            for col in range(degree + 1):
                cells.append((row, col))
    return FreeVariableLayout(model.n, degree, tuple(cells), normalized_time)


def pack(traj: TrajectoryMatrix, layout: FreeVariableLayout) -> np.ndarray:
    """Flatten the layout's cells of a trajectory into the variable vector."""
    if traj.n != layout.n or traj.degree != layout.degree:
        raise ValueError(
            f"trajectory ({traj.n} joints, degree {traj.degree}) does not match "
            f"layout ({layout.n} joints, degree {layout.degree})"
        )
    x = np.array([traj.gamma[row, col] for row, col in layout.cells])
    return x * layout._scales(traj.t_f)


def unpack(x: np.ndarray, layout: FreeVariableLayout, hold: np.ndarray, t_f: float) -> TrajectoryMatrix:
    """Rebuild the full trajectory from the variable vector.

    Rows not covered by the layout hold the constant angle from `hold`.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (layout.p,):
        raise ValueError(f"variable vector has shape {x.shape}, layout expects ({layout.p},)")
    hold = np.asarray(hold, dtype=float)
    if hold.shape != (layout.n,):
        raise ValueError(f"hold vector has shape {hold.shape}, expected ({layout.n},)")
    gamma = np.zeros((layout.n, layout.degree + 1))
    covered = np.zeros(layout.n, dtype=bool)
    for row, _ in layout.cells:
        covered[row] = True
    gamma[~covered, layout.degree] = hold[~covered]
    values = x / layout._scales(t_f)
    for k, (row, col) in enumerate(layout.cells):
        gamma[row, col] = values[k]
    return TrajectoryMatrix(gamma, layout.degree, t_f)
