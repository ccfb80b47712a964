import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.spatial.transform import Rotation

from swingopt.geometry import (
    axis_angle,
    quat_from_axis_angle,
    quat_multiply,
    quat_normalize,
    quat_rate,
    quat_rotation_angle,
    quat_to_matrix,
    rotation_log,
    rpy_matrix,
    skew,
)

unit_floats = st.floats(min_value=-1.0, max_value=1.0)
angles = st.floats(min_value=-3.0, max_value=3.0)


def quats(draw):
    q = np.array([draw(unit_floats) for _ in range(4)])
    n = np.linalg.norm(q)
    if n < 1e-3:
        q = np.array([1.0, 0.0, 0.0, 0.0])
        n = 1.0
    return q / n


def test_skew_matches_cross():
    rng = np.random.default_rng(0)
    for _ in range(20):
        v, u = rng.standard_normal((2, 3))
        np.testing.assert_allclose(skew(v) @ u, np.cross(v, u), atol=1e-15)


def test_skew_antisymmetric():
    S = skew(np.array([1.0, -2.0, 3.0]))
    np.testing.assert_array_equal(S, -S.T)


def test_axis_angle_matches_scipy():
    rng = np.random.default_rng(1)
    for _ in range(30):
        axis = rng.standard_normal(3)
        axis /= np.linalg.norm(axis)
        angle = rng.uniform(-3, 3)
        expect = Rotation.from_rotvec(angle * axis).as_matrix()
        np.testing.assert_allclose(axis_angle(axis, angle), expect, atol=1e-12)


def test_rpy_matrix_matches_factor_product():
    r, p, y = 0.3, -0.7, 1.2
    expect = axis_angle(np.array([1.0, 0, 0]), r) @ axis_angle(
        np.array([0, 1.0, 0]), p) @ axis_angle(np.array([0, 0, 1.0]), y)
    np.testing.assert_allclose(rpy_matrix(r, p, y), expect, atol=1e-14)


def test_quat_normalize_zero_raises():
    with pytest.raises(ValueError):
        quat_normalize(np.zeros(4))


@given(st.data())
def test_quat_to_matrix_is_rotation(data):
    q = quats(data.draw)
    R = quat_to_matrix(q)
    np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-12)


@given(st.data())
def test_quat_to_matrix_matches_scipy(data):
    q = quats(data.draw)
    expect = Rotation.from_quat(q, scalar_first=True).as_matrix()
    np.testing.assert_allclose(quat_to_matrix(q), expect, atol=1e-12)


@given(st.data())
def test_quat_multiply_composes_rotations(data):
    a = quats(data.draw)
    b = quats(data.draw)
    np.testing.assert_allclose(
        quat_to_matrix(quat_multiply(a, b)),
        quat_to_matrix(a) @ quat_to_matrix(b),
        atol=1e-12,
    )


def test_quat_from_axis_angle_round_trip():
    rng = np.random.default_rng(2)
    for _ in range(30):
        axis = rng.standard_normal(3)
        axis /= np.linalg.norm(axis)
        angle = rng.uniform(-3, 3)
        q = quat_from_axis_angle(axis, angle)
        np.testing.assert_allclose(quat_to_matrix(q), axis_angle(axis, angle), atol=1e-12)
        assert quat_rotation_angle(q) == pytest.approx(abs(angle), abs=1e-12)


def test_quat_rotation_angle_identity_is_zero():
    assert quat_rotation_angle(np.array([1.0, 0.0, 0.0, 0.0])) == 0.0
    # the double cover: -q is the same rotation
    assert quat_rotation_angle(np.array([-1.0, 0.0, 0.0, 0.0])) == 0.0


def test_quat_rate_consistent_with_matrix_derivative():
    # dR/dt = skew(omega) R must match the matrix of q + qdot*h to O(h^2)
    q = quat_normalize(np.array([0.9, 0.2, -0.3, 0.1]))
    omega = np.array([0.7, -1.3, 0.4])
    h = 1e-6
    qdot = quat_rate(q, omega)
    dR_expect = skew(omega) @ quat_to_matrix(q)
    dR = (quat_to_matrix(quat_normalize(q + h * qdot))
          - quat_to_matrix(quat_normalize(q - h * qdot))) / (2 * h)
    np.testing.assert_allclose(dR, dR_expect, atol=1e-6)


@given(st.data())
def test_rotation_log_round_trip(data):
    q = quats(data.draw)
    R = quat_to_matrix(q)
    vec = rotation_log(R)
    angle = np.linalg.norm(vec)
    if angle > 0:
        np.testing.assert_allclose(axis_angle(vec / angle, angle), R, atol=1e-6)
    assert angle == pytest.approx(quat_rotation_angle(q), abs=1e-6)


def test_rotation_log_near_pi():
    R = axis_angle(np.array([0.0, 1.0, 0.0]), np.pi - 1e-9)
    vec = rotation_log(R)
    assert np.linalg.norm(vec) == pytest.approx(np.pi - 1e-9, abs=1e-6)
    np.testing.assert_allclose(np.abs(vec / np.linalg.norm(vec)), [0, 1, 0], atol=1e-4)
