"""Built-in robot models.

Three deterministic test robots with physically plausible mass properties:

- planar3: torso plus two single-hinge legs, small enough for hand-checked
  kinematics.
- biped12: torso plus two 6-DoF legs (hip yaw/roll/pitch, knee, ankle
  pitch/roll), about 40 kg with 6 kg legs.
- humanoid20: biped12 plus two 4-DoF arms (shoulder pitch/roll/yaw, elbow).

The leg and arm mounting rotations give the zero configuration a slight
knee and elbow bend; the sagittal-plane position Jacobians of the feet are
full rank there, so optimization can start from all-zero joint angles.
Axis conventions: x forward, y left, z up; left/right legs mirror in y with
identical joint axes.
"""

import numpy as np

from .geometry import axis_angle
from .robot import FROZEN, SIGNIFICANT, JointSpec, RobotModel, SpatialInertia

BUILTIN_NAMES = ("planar3", "biped12", "humanoid20")

_X = np.array([1.0, 0.0, 0.0])
_Y = np.array([0.0, 1.0, 0.0])
_Z = np.array([0.0, 0.0, 1.0])


def _inertia(mass, com, diag):
    return SpatialInertia(mass, np.array(com), np.diag(diag))


def _leg(side, sign):
    """Joint and link definitions for one 6-DoF leg ('l'/'r', y sign)."""
    s = side
    links = [
        (f"hip_yaw_link_{s}", _inertia(0.8, (0, 0, -0.03), (0.002, 0.002, 0.0015))),
        (f"hip_roll_link_{s}", _inertia(0.7, (0, 0, 0), (0.0015, 0.0015, 0.0012))),
        (f"thigh_{s}", _inertia(2.2, (0, 0, -0.2), (0.030, 0.030, 0.004))),
        (f"shank_{s}", _inertia(1.6, (0, 0, -0.19), (0.020, 0.020, 0.0025))),
        (f"ankle_link_{s}", _inertia(0.2, (0, 0, -0.02), (0.0002, 0.0002, 0.00015))),
        (f"foot_{s}", _inertia(0.5, (0.03, 0, -0.02), (0.0006, 0.0012, 0.0012))),
    ]
    joints = [
        JointSpec(f"hip_yaw_{s}", "revolute", "torso", f"hip_yaw_link_{s}",
                  (0, sign * 0.09, -0.08), axis=_Z, significance=FROZEN),
        JointSpec(f"hip_roll_{s}", "revolute", f"hip_yaw_link_{s}", f"hip_roll_link_{s}",
                  (0, 0, -0.06), axis=_X, significance=SIGNIFICANT),
        JointSpec(f"hip_pitch_{s}", "revolute", f"hip_roll_link_{s}", f"thigh_{s}",
                  (0, 0, 0), rotation=axis_angle(_Y, -0.5), axis=_Y, significance=SIGNIFICANT),
        JointSpec(f"knee_{s}", "revolute", f"thigh_{s}", f"shank_{s}",
                  (0, 0, -0.4), rotation=axis_angle(_Y, 1.0), axis=_Y, significance=SIGNIFICANT),
        JointSpec(f"ankle_pitch_{s}", "revolute", f"shank_{s}", f"ankle_link_{s}",
                  (0, 0, -0.4), rotation=axis_angle(_Y, -0.5), axis=_Y, significance=FROZEN),
        JointSpec(f"ankle_roll_{s}", "revolute", f"ankle_link_{s}", f"foot_{s}",
                  (0, 0, -0.04), axis=_X, significance=FROZEN),
    ]
    return links, joints


def _arm(side, sign):
    s = side
    links = [
        (f"shoulder_pitch_link_{s}", _inertia(0.6, (0, sign * 0.02, 0), (0.001, 0.001, 0.001))),
        (f"shoulder_roll_link_{s}", _inertia(0.5, (0, 0, -0.02), (0.0008, 0.0008, 0.0006))),
        (f"upper_arm_{s}", _inertia(1.2, (0, 0, -0.12), (0.008, 0.008, 0.0012))),
        (f"forearm_{s}", _inertia(0.9, (0, 0, -0.11), (0.005, 0.005, 0.0008))),
    ]
    joints = [
        JointSpec(f"shoulder_pitch_{s}", "revolute", "torso", f"shoulder_pitch_link_{s}",
                  (0, sign * 0.17, 0.32), axis=_Y, significance=SIGNIFICANT),
        JointSpec(f"shoulder_roll_{s}", "revolute", f"shoulder_pitch_link_{s}",
                  f"shoulder_roll_link_{s}", (0, sign * 0.045, 0), axis=_X, significance=FROZEN),
        JointSpec(f"shoulder_yaw_{s}", "revolute", f"shoulder_roll_link_{s}", f"upper_arm_{s}",
                  (0, 0, -0.03), axis=_Z, significance=FROZEN),
        JointSpec(f"elbow_{s}", "revolute", f"upper_arm_{s}", f"forearm_{s}",
                  (0, 0, -0.25), rotation=axis_angle(_Y, -0.5), axis=_Y, significance=FROZEN),
    ]
    return links, joints


def _planar3():
    links = [
        ("torso", _inertia(30.0, (0, 0, 0.1), (1.0, 0.8, 0.5))),
        ("leg_l", _inertia(5.0, (0, 0, -0.4), (0.3, 0.3, 0.02))),
        ("leg_r", _inertia(5.0, (0, 0, -0.4), (0.3, 0.3, 0.02))),
    ]
    joints = [
        JointSpec("hip_left", "revolute", "torso", "leg_l", (0, 0.1, -0.1),
                  axis=_Y, significance=SIGNIFICANT),
        JointSpec("hip_right", "revolute", "torso", "leg_r", (0, -0.1, -0.1),
                  axis=_Y, significance=SIGNIFICANT),
    ]
    return RobotModel(
        links=tuple(links),
        joints=tuple(joints),
        end_effectors={
            "foot_left": ("leg_l", np.array([0.0, 0.0, -0.8])),
            "foot_right": ("leg_r", np.array([0.0, 0.0, -0.8])),
        },
        limbs={"left_leg": ["leg_l"], "right_leg": ["leg_r"]},
        name="planar3",
    )


def _biped12():
    links = [("torso", _inertia(28.0, (0, 0, 0.05), (0.87, 0.73, 0.43)))]
    joints = []
    for side, sign in (("l", 1.0), ("r", -1.0)):
        leg_links, leg_joints = _leg(side, sign)
        links += leg_links
        joints += leg_joints
    return RobotModel(
        links=tuple(links),
        joints=tuple(joints),
        end_effectors={
            "foot_left": ("foot_l", np.array([0.0, 0.0, -0.04])),
            "foot_right": ("foot_r", np.array([0.0, 0.0, -0.04])),
        },
        limbs={
            "left_leg": [n for n, _ in _leg("l", 1.0)[0]],
            "right_leg": [n for n, _ in _leg("r", -1.0)[0]],
        },
        name="biped12",
    )


def _humanoid20():
    links = [("torso", _inertia(22.0, (0, 0, 0.08), (0.68, 0.57, 0.34)))]
    joints = []
    for side, sign in (("l", 1.0), ("r", -1.0)):
        leg_links, leg_joints = _leg(side, sign)
        links += leg_links
        joints += leg_joints
    for side, sign in (("l", 1.0), ("r", -1.0)):
        arm_links, arm_joints = _arm(side, sign)
        links += arm_links
        joints += arm_joints
    return RobotModel(
        links=tuple(links),
        joints=tuple(joints),
        end_effectors={
            "foot_left": ("foot_l", np.array([0.0, 0.0, -0.04])),
            "foot_right": ("foot_r", np.array([0.0, 0.0, -0.04])),
        },
        limbs={
            "left_leg": [n for n, _ in _leg("l", 1.0)[0]],
            "right_leg": [n for n, _ in _leg("r", -1.0)[0]],
            "left_arm": [n for n, _ in _arm("l", 1.0)[0]],
            "right_arm": [n for n, _ in _arm("r", -1.0)[0]],
        },
        name="humanoid20",
    )


_BUILDERS = {"planar3": _planar3, "biped12": _biped12, "humanoid20": _humanoid20}


def builtin(identifier: str) -> RobotModel:
    """Construct one of the built-in models by name."""
    try:
        build = _BUILDERS[identifier]
    except KeyError:
        raise KeyError(
            f"unknown builtin model {identifier!r}; choose from {', '.join(BUILTIN_NAMES)}"
        ) from None
    return build()
