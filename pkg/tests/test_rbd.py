import numpy as np
import pytest

from swingopt.geometry import quat_from_axis_angle
from swingopt.rbd import (
    com_position,
    compute_centroidal_map,
    forward_kinematics,
    momentum_from_velocities,
    point_jacobian,
    rotational_coupling_residual,
)

from conftest import make_oblique4, make_single_body, random_quat
from reference import (
    ref_com,
    ref_coupling_matrix,
    ref_fk,
    ref_frame_position,
    ref_momentum,
)

ALL_MODELS = ["planar3", "biped12", "humanoid20", "oblique4"]


@pytest.fixture
def model_by_name(planar3, biped12, humanoid20, oblique4):
    return {"planar3": planar3, "biped12": biped12,
            "humanoid20": humanoid20, "oblique4": oblique4}


class TestForwardKinematics:
    def test_planar3_hip_right_angle(self, planar3):
        # hand 2-link geometry: hip at (0, 0.1, -0.1), +Y hinge at pi/2 maps
        # the (0, 0, -0.8) foot offset onto (-0.8, 0, 0)
        poses = forward_kinematics(planar3, [1, 0, 0, 0], [np.pi / 2, 0.0])
        np.testing.assert_allclose(
            poses.position("foot_left"), [-0.8, 0.1, -0.1], atol=1e-14)
        np.testing.assert_allclose(
            poses.position("foot_right"), [0.0, -0.1, -0.9], atol=1e-14)

    def test_matches_reference_on_random_poses(self, model_by_name):
        rng = np.random.default_rng(11)
        for name in ALL_MODELS:
            model = model_by_name[name]
            for _ in range(5):
                quat = random_quat(rng)
                q = rng.uniform(-1.2, 1.2, model.n)
                poses = forward_kinematics(model, quat, q)
                R_ref, P_ref = ref_fk(model, quat, q)
                for link, _ in model.links:
                    Rl, Pl = poses.links[link]
                    np.testing.assert_allclose(Rl, R_ref[link], atol=1e-12)
                    np.testing.assert_allclose(Pl, P_ref[link], atol=1e-12)
                for frame in model.end_effectors:
                    np.testing.assert_allclose(
                        poses.position(frame),
                        ref_frame_position(model, quat, q, frame), atol=1e-12)

    def test_unknown_frame_raises(self, planar3):
        poses = forward_kinematics(planar3, [1, 0, 0, 0], [0.0, 0.0])
        with pytest.raises(KeyError):
            poses.position("no_such_frame")


class TestComPosition:
    def test_single_body_offset_rotates(self):
        model = make_single_body(com=(0.1, 0.0, 0.2))
        quat = quat_from_axis_angle([0, 0, 1.0], np.pi / 2)
        pg = com_position(model, quat, [])
        np.testing.assert_allclose(pg, [0.0, 0.1, 0.2], atol=1e-15)

    def test_matches_mass_weighted_fk_sum(self, model_by_name):
        rng = np.random.default_rng(12)
        for name in ALL_MODELS:
            model = model_by_name[name]
            quat = random_quat(rng)
            q = rng.uniform(-1.0, 1.0, model.n)
            np.testing.assert_allclose(
                com_position(model, quat, q), ref_com(model, quat, q), atol=1e-12)


class TestCentroidalMap:
    def test_momentum_against_per_body_fd_oracle(self, model_by_name):
        rng = np.random.default_rng(13)
        for name in ALL_MODELS:
            model = model_by_name[name]
            for _ in range(8):
                quat = random_quat(rng)
                q = rng.uniform(-1.2, 1.2, model.n)
                omega = rng.standard_normal(3)
                qdot = rng.standard_normal(model.n)
                cmap = compute_centroidal_map(model, quat, q)
                k = cmap.ang_base_ang @ omega + cmap.ang_joint @ qdot
                _, k_ref = ref_momentum(model, quat, q, omega, qdot)
                scale = max(np.linalg.norm(k_ref), 1.0)
                np.testing.assert_allclose(k / scale, k_ref / scale, atol=1e-8)

    def test_base_linear_block_is_zero(self, model_by_name):
        # angular momentum about the CoM cannot see a rigid translation
        rng = np.random.default_rng(14)
        for name in ALL_MODELS:
            model = model_by_name[name]
            for _ in range(20):
                cmap = compute_centroidal_map(
                    model, random_quat(rng), rng.uniform(-1.5, 1.5, model.n))
                assert np.max(np.abs(cmap.ang_base_lin)) < 1e-9

    def test_base_angular_block_is_rotated_composite_inertia(self, model_by_name):
        rng = np.random.default_rng(15)
        for name in ALL_MODELS:
            model = model_by_name[name]
            for _ in range(10):
                quat = random_quat(rng)
                q = rng.uniform(-1.5, 1.5, model.n)
                res, min_sv = rotational_coupling_residual(model, quat, q)
                assert res < 1e-9
                assert min_sv > 0

    def test_coupling_matches_fd_oracle(self, planar3, oblique4):
        rng = np.random.default_rng(16)
        for model in (planar3, oblique4):
            quat = random_quat(rng)
            q = rng.uniform(-1.0, 1.0, model.n)
            cmap = compute_centroidal_map(model, quat, q)
            A_ref = ref_coupling_matrix(model, quat, q)
            np.testing.assert_allclose(cmap.ang_base_ang, A_ref, atol=1e-6)

    def test_inertia_com_spd(self, model_by_name):
        rng = np.random.default_rng(17)
        for name in ALL_MODELS:
            model = model_by_name[name]
            cmap = compute_centroidal_map(
                model, random_quat(rng), rng.uniform(-1.0, 1.0, model.n))
            lam = np.linalg.eigvalsh(cmap.inertia_com)
            assert lam[0] > 0
            np.testing.assert_allclose(cmap.inertia_com, cmap.inertia_com.T, atol=1e-12)

    def test_single_body_coupling_exact(self):
        model = make_single_body(inertia_diag=(1.0, 2.0, 3.0))
        res, min_sv = rotational_coupling_residual(model, [1, 0, 0, 0], [])
        assert res == 0.0
        assert min_sv == pytest.approx(1.0)


class TestMomentumRoutes:
    def test_two_routes_agree(self, model_by_name):
        rng = np.random.default_rng(18)
        for name in ALL_MODELS:
            model = model_by_name[name]
            for _ in range(10):
                quat = random_quat(rng)
                q = rng.uniform(-1.2, 1.2, model.n)
                v_b = rng.standard_normal(3)
                omega = rng.standard_normal(3)
                qdot = rng.standard_normal(model.n)
                cmap = compute_centroidal_map(model, quat, q)
                nu = np.concatenate([v_b, omega, qdot])
                l_map = cmap.lin @ nu
                k_map = cmap.ang_base_lin @ v_b + cmap.ang_base_ang @ omega + cmap.ang_joint @ qdot
                l_sum, k_sum = momentum_from_velocities(model, quat, q, v_b, omega, qdot)
                scale = max(np.linalg.norm(k_sum), np.linalg.norm(l_sum), 1.0)
                np.testing.assert_allclose(l_map / scale, l_sum / scale, atol=1e-8)
                np.testing.assert_allclose(k_map / scale, k_sum / scale, atol=1e-8)

    def test_linear_momentum_tracks_com_rate(self, biped12):
        # l = m * d/dt p_G under a simultaneous base/joint advance
        rng = np.random.default_rng(19)
        quat = random_quat(rng)
        q = rng.uniform(-1.0, 1.0, biped12.n)
        omega = rng.standard_normal(3)
        qdot = rng.standard_normal(biped12.n)
        l, _ = momentum_from_velocities(biped12, quat, q, np.zeros(3), omega, qdot)
        from reference import _advance
        h = 1e-6
        qp, jp = _advance(biped12, quat, q, omega, qdot, h)
        qm, jm = _advance(biped12, quat, q, omega, qdot, -h)
        v_com = (ref_com(biped12, qp, jp) - ref_com(biped12, qm, jm)) / (2 * h)
        np.testing.assert_allclose(l, biped12.total_mass * v_com, atol=1e-5)

    def test_angular_momentum_vbase_insensitive(self, biped12):
        # transport terms of a rigid translation cancel about the CoM
        rng = np.random.default_rng(20)
        quat = random_quat(rng)
        q = rng.uniform(-1.0, 1.0, biped12.n)
        omega = rng.standard_normal(3)
        qdot = rng.standard_normal(biped12.n)
        _, k0 = momentum_from_velocities(biped12, quat, q, np.zeros(3), omega, qdot)
        _, k1 = momentum_from_velocities(biped12, quat, q, [5.0, -3.0, 2.0], omega, qdot)
        np.testing.assert_allclose(k0, k1, atol=1e-12)


class TestPointJacobian:
    def test_base_translation_block_is_identity(self, planar3):
        J = point_jacobian(planar3, [1, 0, 0, 0], [0.3, -0.2], "foot_left")
        np.testing.assert_array_equal(J[:, :3], np.eye(3))

    def test_planar3_hinge_rate_geometry(self, planar3):
        # unit hinge rate moves the foot at leg-length speed, normal to the leg
        J = point_jacobian(planar3, [1, 0, 0, 0], [0.0, 0.0], "foot_left")
        v = J[:, 6]
        np.testing.assert_allclose(v, [-0.8, 0.0, 0.0], atol=1e-14)

    def test_matches_fd_of_fk(self, model_by_name):
        rng = np.random.default_rng(21)
        from reference import _advance
        h = 1e-6
        for name in ALL_MODELS:
            model = model_by_name[name]
            if not model.end_effectors:
                continue
            frame = sorted(model.end_effectors)[0]
            quat = random_quat(rng)
            q = rng.uniform(-1.0, 1.0, model.n)
            omega = rng.standard_normal(3)
            qdot = rng.standard_normal(model.n)
            J = point_jacobian(model, quat, q, frame)
            v = J[:, 3:6] @ omega + J[:, 6:] @ qdot
            qp, jp = _advance(model, quat, q, omega, qdot, h)
            qm, jm = _advance(model, quat, q, omega, qdot, -h)
            v_fd = (ref_frame_position(model, qp, jp, frame)
                    - ref_frame_position(model, qm, jm, frame)) / (2 * h)
            np.testing.assert_allclose(v, v_fd, atol=1e-5)

    def test_unknown_frame_raises(self, planar3):
        with pytest.raises(KeyError):
            point_jacobian(planar3, [1, 0, 0, 0], [0.0, 0.0], "nope")
