"""Flight-phase limb-swing trajectory optimization for legged robots.

During a jump or running step no external moment acts about the center of
mass, so the angular momentum there is conserved and limb motion is the
only handle on the base orientation.  This package computes the momentum
quantities of a kinematic tree, integrates the base orientation across a
flight phase, and optimizes polynomial limb trajectories so the body lands
upright while the feet hit their liftoff/touchdown targets.
"""

from ._kernels import BACKEND, warmup
from .flight import (
    FlightInitialState,
    FlightLog,
    body_rate,
    flight_momentum,
    integrate_orientation,
    limb_contributions,
)
from .models import BUILTIN_NAMES, builtin
from .poly import (
    FreeVariableLayout,
    TrajectoryMatrix,
    pack,
    significant_layout,
    traj_from_json_dict,
    unpack,
)
from .problem import (
    CONSTRAINT_NAMES,
    FlightProblem,
    PlaybackReport,
    constraint_residuals,
    flight_cost,
    optimize_flight,
    playback,
)
from .rbd import (
    com_position,
    compute_centroidal_map,
    forward_kinematics,
    momentum_from_velocities,
    point_jacobian,
    rotational_coupling_residual,
)
from .robot import (
    BaseState,
    CentroidalMap,
    CentroidalState,
    JointSpec,
    ModelError,
    RobotModel,
    SpatialInertia,
)
from .solver import (
    ProblemFunctions,
    SolveResult,
    SolverError,
    SolverOptions,
    line_search_min,
    line_search_zero,
    nullspace_basis,
    numerical_gradient,
    solve,
)
from .urdf import ParseError, load_model, parse_model, serialize_model

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BUILTIN_NAMES",
    "BaseState",
    "CONSTRAINT_NAMES",
    "CentroidalMap",
    "CentroidalState",
    "FlightInitialState",
    "FlightLog",
    "FlightProblem",
    "FreeVariableLayout",
    "JointSpec",
    "ModelError",
    "ParseError",
    "PlaybackReport",
    "ProblemFunctions",
    "RobotModel",
    "SolveResult",
    "SolverError",
    "SolverOptions",
    "SpatialInertia",
    "TrajectoryMatrix",
    "body_rate",
    "builtin",
    "com_position",
    "compute_centroidal_map",
    "constraint_residuals",
    "flight_cost",
    "flight_momentum",
    "forward_kinematics",
    "integrate_orientation",
    "limb_contributions",
    "line_search_min",
    "line_search_zero",
    "load_model",
    "momentum_from_velocities",
    "nullspace_basis",
    "numerical_gradient",
    "optimize_flight",
    "pack",
    "parse_model",
    "playback",
    "point_jacobian",
    "rotational_coupling_residual",
    "serialize_model",
    "significant_layout",
    "solve",
    "traj_from_json_dict",
    "unpack",
    "warmup",
]
