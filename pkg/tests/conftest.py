import numpy as np
import pytest

from swingopt import _kernels, models
from swingopt.robot import JointSpec, RobotModel, SpatialInertia


@pytest.fixture(scope="session")
def planar3():
    return models.builtin("planar3")


@pytest.fixture(scope="session")
def biped12():
    model = models.builtin("biped12")
    _kernels.warmup(model.packed)
    return model


@pytest.fixture(scope="session")
def humanoid20():
    model = models.builtin("humanoid20")
    _kernels.warmup(model.packed)
    return model


def _inert(mass, com, diag):
    return SpatialInertia(mass, np.array(com, dtype=float), np.diag(diag))


def make_single_body(inertia_diag=(1.0, 2.0, 3.0), mass=5.0, com=(0.0, 0.0, 0.0)):
    """One rigid body, no joints: the smallest valid model."""
    return RobotModel(
        links=(("body", _inert(mass, com, inertia_diag)),),
        joints=(),
        end_effectors={},
        name="single",
    )


def make_oblique4():
    """Four-joint model exercising negated, oblique and rotated joint axes.

    The builtin models only use +X/+Y/+Z axes; this one adds a -Y axis, a
    -Z axis, a non-coordinate axis and a joint-frame rotation so code paths
    that special-case coordinate axes are forced through their general
    fallbacks as well.
    """
    ax_obl = np.array([1.0, 2.0, 2.0]) / 3.0
    links = [
        ("torso", _inert(10.0, (0, 0, 0.05), (0.4, 0.3, 0.2))),
        ("l1", _inert(2.0, (0, 0, -0.15), (0.02, 0.02, 0.004))),
        ("l2", _inert(1.0, (0, 0, -0.12), (0.01, 0.01, 0.002))),
        ("r1", _inert(2.0, (0.01, 0, -0.15), (0.02, 0.02, 0.004))),
        ("r2", _inert(1.0, (0, 0.01, -0.12), (0.01, 0.01, 0.002))),
    ]
    joints = [
        JointSpec("hl", "revolute", "torso", "l1", (0, 0.1, -0.1),
                  axis=np.array([0.0, -1.0, 0.0]), significance="significant"),
        JointSpec("kl", "revolute", "l1", "l2", (0, 0, -0.3),
                  axis=ax_obl, significance="significant"),
        JointSpec("hr", "revolute", "torso", "r1", (0, -0.1, -0.1),
                  axis=np.array([0.0, 0.0, -1.0]), significance="significant"),
        JointSpec("kr", "revolute", "r1", "r2", (0, 0, -0.3),
                  rotation=np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
                  axis=np.array([-1.0, 0.0, 0.0]), significance="significant"),
    ]
    return RobotModel(
        links=tuple(links),
        joints=tuple(joints),
        end_effectors={"foot_left": ("l2", np.array([0.0, 0.0, -0.3])),
                       "foot_right": ("r2", np.array([0.0, 0.0, -0.3]))},
        limbs={"left_leg": ["l1", "l2"], "right_leg": ["r1", "r2"]},
        name="oblique4",
    )


@pytest.fixture(scope="session")
def oblique4():
    return make_oblique4()


def random_quat(rng):
    q = rng.standard_normal(4)
    return q / np.linalg.norm(q)
