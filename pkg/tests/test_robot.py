import numpy as np
import pytest

from swingopt.robot import JointSpec, ModelError, RobotModel, SpatialInertia

from conftest import make_oblique4, make_single_body


def _body(name, mass=1.0):
    return (name, SpatialInertia(mass, np.zeros(3), 0.01 * np.eye(3)))


def _hinge(name, parent, child, axis=(0, 0, 1.0)):
    return JointSpec(name, "revolute", parent, child, (0, 0, -0.1),
                     axis=np.asarray(axis, dtype=float), significance="significant")


class TestSpatialInertia:
    def test_negative_mass_rejected(self):
        with pytest.raises(ModelError):
            SpatialInertia(-1.0, np.zeros(3), np.eye(3))

    def test_asymmetric_inertia_rejected(self):
        I = np.eye(3)
        I[0, 1] = 0.5
        with pytest.raises(ModelError):
            SpatialInertia(1.0, np.zeros(3), I)

    def test_negative_definite_inertia_rejected(self):
        with pytest.raises(ModelError):
            SpatialInertia(1.0, np.zeros(3), -np.eye(3))

    def test_triangle_bound_rejected(self):
        # no rigid body can have one principal moment above the sum of the others
        with pytest.raises(ModelError):
            SpatialInertia(1.0, np.zeros(3), np.diag([1.0, 1.0, 5.0]))

    def test_massless_with_inertia_rejected(self):
        with pytest.raises(ModelError):
            SpatialInertia(0.0, np.zeros(3), 1e-6 * np.eye(3))

    def test_massless_frame_allowed(self):
        si = SpatialInertia.massless()
        assert si.mass == 0.0


class TestJointSpec:
    def test_unknown_kind_rejected(self):
        with pytest.raises(ModelError):
            JointSpec("j", "prismatic", "a", "b", (0, 0, 0), axis=np.array([0, 0, 1.0]))

    def test_revolute_needs_axis(self):
        with pytest.raises(ModelError):
            JointSpec("j", "revolute", "a", "b", (0, 0, 0), significance="significant")

    def test_revolute_needs_significance(self):
        with pytest.raises(ModelError):
            JointSpec("j", "revolute", "a", "b", (0, 0, 0), axis=np.array([0, 0, 1.0]))

    def test_axis_must_be_unit(self):
        with pytest.raises(ModelError):
            JointSpec("j", "revolute", "a", "b", (0, 0, 0),
                      axis=np.array([0, 0, 2.0]), significance="frozen")

    def test_fixed_joint_with_axis_rejected(self):
        with pytest.raises(ModelError):
            JointSpec("j", "fixed", "a", "b", (0, 0, 0), axis=np.array([0, 0, 1.0]))


class TestRobotModelValidation:
    def test_duplicate_link_names(self):
        with pytest.raises(ModelError):
            RobotModel(links=(_body("a"), _body("a")),
                       joints=(_hinge("j", "a", "a"),), end_effectors={})

    def test_two_parents_rejected(self):
        with pytest.raises(ModelError):
            RobotModel(
                links=(_body("a"), _body("b"), _body("c")),
                joints=(_hinge("j1", "a", "b"), _hinge("j2", "a", "b")),
                end_effectors={},
            )

    def test_disconnected_tree_rejected(self):
        with pytest.raises(ModelError):
            RobotModel(links=(_body("a"), _body("b"), _body("c")),
                       joints=(_hinge("j1", "a", "b"),), end_effectors={})

    def test_topological_order_required(self):
        with pytest.raises(ModelError):
            RobotModel(
                links=(_body("a"), _body("b"), _body("c")),
                joints=(_hinge("j2", "b", "c"), _hinge("j1", "a", "b")),
                end_effectors={},
            )

    def test_unknown_end_effector_link(self):
        with pytest.raises(ModelError):
            RobotModel(links=(_body("a"),), joints=(),
                       end_effectors={"ee": ("nope", np.zeros(3))})

    def test_zero_total_mass_rejected(self):
        with pytest.raises(ModelError):
            RobotModel(links=(("a", SpatialInertia.massless()),), joints=(),
                       end_effectors={})

    def test_single_body_accepted(self):
        model = make_single_body()
        assert model.n == 0
        assert model.total_mass == 5.0


class TestBuiltinStructure:
    def test_planar3_counts(self, planar3):
        assert planar3.n == 2
        assert planar3.total_mass == pytest.approx(40.0)

    def test_biped12_significance_split(self, biped12):
        assert biped12.n == 12
        # hip roll, hip pitch and knee per leg move enough mass to matter
        assert len(biped12.significant_joints) == 6
        assert len(biped12.frozen_joints) == 6
        for name in biped12.significant_joints:
            assert name.startswith(("hip_roll", "hip_pitch", "knee"))

    def test_humanoid20_significance_split(self, humanoid20):
        assert humanoid20.n == 20
        assert len(humanoid20.significant_joints) == 8
        extras = [n for n in humanoid20.significant_joints if n.startswith("shoulder_pitch")]
        assert len(extras) == 2

    def test_joint_index_lookup(self, biped12):
        assert biped12.joint_index(biped12.joint_names[3]) == 3
        with pytest.raises(ModelError):
            biped12.joint_index("no_such_joint")

    def test_check_q_shape(self, planar3):
        with pytest.raises(ValueError):
            planar3.check_q(np.zeros(3))

    def test_check_base_orientation_norm(self, planar3):
        with pytest.raises(ValueError):
            planar3.check_base_orientation(np.array([2.0, 0, 0, 0]))


class TestPackedModel:
    def test_axis_classification(self, biped12):
        pk = biped12.packed
        eye = np.eye(3)
        for b in range(pk.nb):
            kind = pk.jaxis_kind[b]
            sign = pk.jaxis_sign[b]
            if pk.qidx[b] < 0:
                continue
            if kind == 0:
                continue
            np.testing.assert_array_equal(pk.jaxis[b], sign * eye[kind - 1])

    def test_axis_classification_oblique(self):
        model = make_oblique4()
        pk = model.packed
        kinds = {model.links[b][0]: int(pk.jaxis_kind[b]) for b in range(pk.nb)}
        signs = {model.links[b][0]: float(pk.jaxis_sign[b]) for b in range(pk.nb)}
        assert kinds["l1"] == 2 and signs["l1"] == -1.0
        assert kinds["l2"] == 0
        assert kinds["r1"] == 3 and signs["r1"] == -1.0
        assert kinds["r2"] == 1 and signs["r2"] == -1.0

    def test_identity_rotation_flags(self):
        model = make_oblique4()
        pk = model.packed
        idents = {model.links[b][0]: bool(pk.jrot_ident[b]) for b in range(pk.nb)}
        assert idents["l1"] and idents["l2"] and idents["r1"]
        assert not idents["r2"]

    def test_parent_indices_topological(self, humanoid20):
        pk = humanoid20.packed
        assert pk.parent[0] == -1
        assert np.all(pk.parent[1:] < np.arange(1, pk.nb))

    def test_qidx_covers_all_joints(self, biped12):
        pk = biped12.packed
        used = sorted(int(i) for i in pk.qidx if i >= 0)
        assert used == list(range(biped12.n))
