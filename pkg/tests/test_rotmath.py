import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from armfusion import rotmath as rm
from armfusion.errors import InvalidRotationError
from conftest import angles, random_quats, rotation_of, unit_quats

deg = math.radians


def axis_angle_matrix(axis, angle):
    # textbook Rodrigues written out component by component
    x, y, z = np.asarray(axis, float) / np.linalg.norm(axis)
    c, s, C = math.cos(angle), math.sin(angle), 1 - math.cos(angle)
    return np.array([
        [c + x * x * C, x * y * C - z * s, x * z * C + y * s],
        [y * x * C + z * s, c + y * y * C, y * z * C - x * s],
        [z * x * C - y * s, z * y * C + x * s, c + z * z * C],
    ])


def s3_angle(q0, q1):
    # rotation angle between two unit quaternions
    d = min(1.0, abs(float(np.dot(q0, q1))))
    return 2.0 * math.acos(d)


# --- conversions -------------------------------------------------------------

def test_identity_matrix_gives_identity_quaternion():
    np.testing.assert_array_equal(rm.quat_from_matrix(np.eye(3)), [1, 0, 0, 0])


def test_half_turn_about_x():
    q = rm.quat_from_matrix(rm.rot_x(math.pi))
    np.testing.assert_allclose(q, [0, 1, 0, 0], atol=1e-15)


def test_identity_quaternion_gives_identity_matrix():
    np.testing.assert_array_equal(rm.matrix_from_quat([1.0, 0.0, 0.0, 0.0]), np.eye(3))


def test_quarter_turn_quaternion():
    q = [math.cos(deg(45)), math.sin(deg(45)), 0.0, 0.0]
    np.testing.assert_allclose(rm.matrix_from_quat(q), axis_angle_matrix([1, 0, 0], deg(90)), atol=1e-15)


def test_zero_quaternion_rejected():
    with pytest.raises(InvalidRotationError):
        rm.matrix_from_quat([0.0, 0.0, 0.0, 0.0])


def test_non_orthonormal_matrix_rejected():
    with pytest.raises(InvalidRotationError):
        rm.quat_from_matrix(np.diag([1.0, 1.0, 1.1]))
    with pytest.raises(InvalidRotationError):
        rm.quat_from_matrix(np.diag([1.0, 1.0, -1.0]))  # reflection


def test_matrix_from_quat_renormalizes():
    q = np.array([0.3, -0.2, 0.9, 0.1])
    np.testing.assert_allclose(rm.matrix_from_quat(3.0 * q), rotation_of(q), atol=1e-14)


@given(unit_quats)
def test_matrix_from_quat_matches_sandwich_product(q):
    np.testing.assert_allclose(rm.matrix_from_quat(q), rotation_of(q), atol=1e-12)


@given(unit_quats)
def test_matrix_round_trip(q):
    R = rotation_of(q)
    p = rm.quat_from_matrix(R)
    assert p[0] >= 0.0
    assert abs(np.dot(p, p) - 1.0) <= 1e-12
    assert np.max(np.abs(rm.matrix_from_quat(p) - R)) <= 1e-9


@given(unit_quats)
def test_quaternion_round_trip_up_to_sign(q):
    p = rm.quat_from_matrix(rm.matrix_from_quat(q))
    assert min(np.max(np.abs(p - q)), np.max(np.abs(p + q))) <= 1e-9


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=3, max_size=3))
def test_rotvec_maps_agree(v):
    v = np.array(v)
    R = rm.matrix_from_rotvec(v)
    np.testing.assert_allclose(rm.matrix_from_quat(rm.quat_from_rotvec(v)), R, atol=1e-12)
    angle = np.linalg.norm(v)
    if angle > 1e-9:
        np.testing.assert_allclose(R, axis_angle_matrix(v, angle), atol=1e-12)
    # log map returns the equivalent vector with angle in [0, pi]
    np.testing.assert_allclose(rm.matrix_from_rotvec(rm.rotvec_from_matrix(R)), R, atol=1e-9)


def test_orthonormalize_repairs_perturbed_matrix():
    R = rm.rot_x(0.3) @ rm.rot_y(-1.1)
    bad = R + 1e-4 * np.random.default_rng(0).normal(size=(3, 3))
    fixed = rm.orthonormalize(bad)
    assert rm.orthonormality_error(fixed) < 1e-14
    assert np.max(np.abs(fixed - R)) < 1e-3


# --- slerp ---------------------------------------------------------------------

@given(unit_quats)
def test_slerp_identical_endpoints(q):
    np.testing.assert_allclose(rm.slerp(q, q, 0.5), q, atol=1e-12)


@given(unit_quats, unit_quats)
def test_slerp_endpoints(q0, q1):
    np.testing.assert_allclose(rm.slerp(q0, q1, 0.0), q0, atol=1e-12)
    end = rm.slerp(q0, q1, 1.0)
    assert min(np.max(np.abs(end - q1)), np.max(np.abs(end + q1))) <= 1e-9


def test_slerp_halfway_to_quarter_turn():
    q90 = rm.quat_from_axis_angle([1, 0, 0], deg(90))
    half = rm.slerp([1.0, 0.0, 0.0, 0.0], q90, 0.5)
    np.testing.assert_allclose(half, [math.cos(deg(22.5)), math.sin(deg(22.5)), 0, 0], atol=1e-15)


def test_slerp_takes_short_arc_for_antipodal_representatives():
    q = rm.quat_from_axis_angle([0, 1, 0], deg(40))
    out = rm.slerp([1.0, 0.0, 0.0, 0.0], -q, 0.5)
    assert s3_angle(out, rm.quat_from_axis_angle([0, 1, 0], deg(20))) < 1e-12


def test_slerp_nearly_parallel_falls_back_to_lerp():
    q0 = np.array([1.0, 0.0, 0.0, 0.0])
    q1 = rm.quat_from_axis_angle([0, 0, 1], 1e-9)
    out = rm.slerp(q0, q1, 0.25)
    assert np.all(np.isfinite(out))
    assert abs(np.linalg.norm(out) - 1.0) < 1e-15
    assert s3_angle(out, rm.quat_from_axis_angle([0, 0, 1], 0.25e-9)) < 1e-15


@given(unit_quats, unit_quats, st.floats(0.0, 1.0))
def test_slerp_constant_angular_velocity(q0, q1, t):
    out = rm.slerp(q0, q1, t)
    assert abs(np.linalg.norm(out) - 1.0) <= 1e-9
    total = rm.quat_angle(q0, q1)
    assert abs(rm.quat_angle(q0, out) - t * total) <= 1e-9
    assert abs(rm.quat_angle(out, q1) - (1 - t) * total) <= 1e-9


def test_quat_angle_matches_acos_form():
    for q0, q1 in zip(random_quats(500, 1), random_quats(500, 2)):
        assert abs(rm.quat_angle(q0, q1) - s3_angle(q0, q1)) < 1e-7


# --- swing-twist -------------------------------------------------------------

def test_decompose_pure_twist():
    Rz, Rxy = rm.decompose_z_xy(rm.rot_z(deg(30)))
    np.testing.assert_allclose(Rz, rm.rot_z(deg(30)), atol=1e-15)
    np.testing.assert_allclose(Rxy, np.eye(3), atol=1e-15)


def test_decompose_pure_swing():
    Rz, Rxy = rm.decompose_z_xy(rm.rot_x(deg(45)))
    np.testing.assert_allclose(Rz, np.eye(3), atol=1e-15)
    np.testing.assert_allclose(Rxy, rm.rot_x(deg(45)), atol=1e-15)


def _check_decomposition(R):
    Rz, Rxy = rm.decompose_z_xy(R)
    assert np.max(np.abs(Rz @ Rxy - R)) <= 1e-12
    # Rz is a rotation about world Z
    assert Rz[2, 2] == 1.0 and not np.any(Rz[2, :2]) and not np.any(Rz[:2, 2])
    assert rm.orthonormality_error(Rz) <= 1e-12
    assert rm.is_rotation(Rxy, 1e-12)
    # no twist left: canonical quaternion of the swing has z = 0
    assert abs(rm.quat_from_matrix(Rxy)[3]) <= 1e-12


@given(unit_quats)
def test_decompose_recomposes_and_removes_twist(q):
    _check_decomposition(rm.matrix_from_quat(q))


def test_decompose_degenerate_half_turn_swing():
    # body Z anti-parallel to world Z: twist is undefined, decomposition still exact
    for R in (rm.rot_x(math.pi), rm.rot_y(math.pi) @ rm.rot_z(0.7), rm.rot_z(-1.2) @ rm.rot_x(math.pi)):
        _check_decomposition(R)


@given(unit_quats)
def test_swing_twist_quaternion_factorization(q):
    twist, swing = rm.swing_twist_z(q)
    np.testing.assert_allclose(rm.quat_multiply(twist, swing), q, atol=1e-12)
    assert twist[1] == 0.0 and twist[2] == 0.0
    assert abs(swing[3]) <= 1e-12


# --- tilt and torsion ----------------------------------------------------------

def test_tilt_torsion_identity():
    assert rm.tilt_torsion_from_rotation(np.eye(3)) == (0.0, 0.0, 0.0)


@given(angles)
def test_tilt_torsion_pure_twist(sigma):
    tt = rm.tilt_torsion_from_rotation(rm.rot_z(sigma))
    assert tt.azimuth == 0.0 and tt.tilt == 0.0
    assert abs(rm.wrap_angle(tt.torsion - sigma)) <= 1e-12


@given(unit_quats)
def test_tilt_torsion_recomposes(q):
    R = rm.matrix_from_quat(q)
    tt = rm.tilt_torsion_from_rotation(R)
    assert 0.0 <= tt.tilt <= math.pi
    assert -math.pi < tt.azimuth <= math.pi and -math.pi < tt.torsion <= math.pi
    assert np.max(np.abs(rm.rotation_from_tilt_torsion(*tt) - R)) <= 1e-9


@given(angles, st.floats(1e-3, math.pi - 1e-3), angles)
def test_tilt_torsion_recovers_angles(phi, theta, sigma):
    tt = rm.tilt_torsion_from_rotation(rm.rotation_from_tilt_torsion(phi, theta, sigma))
    assert abs(tt.tilt - theta) <= 1e-9
    assert abs(rm.wrap_angle(tt.azimuth - phi)) <= 1e-6
    assert abs(rm.wrap_angle(tt.torsion - sigma)) <= 1e-6


def test_tilt_torsion_upside_down():
    R = rm.rot_y(math.pi) @ rm.rot_z(0.4)
    tt = rm.tilt_torsion_from_rotation(R)
    assert tt.tilt == math.pi and tt.azimuth == 0.0
    np.testing.assert_allclose(rm.rotation_from_tilt_torsion(*tt), R, atol=1e-12)


# --- elevation ------------------------------------------------------------------

DOWN_AXIS = np.array([0.0, 0.0, -1.0])


def test_elevation_at_calibration_pose():
    assert rm.elevation_from_rotation(np.eye(3), DOWN_AXIS) == 0.0


def test_elevation_horizontal():
    assert abs(rm.elevation_from_rotation(rm.rot_y(deg(90)), DOWN_AXIS) - math.pi / 2) < 1e-15
    assert abs(rm.elevation_from_rotation(rm.rot_x(deg(-90)), DOWN_AXIS) - math.pi / 2) < 1e-15


def test_elevation_equals_tilt_on_random_rotations():
    worst = 0.0
    for q in random_quats(10_000, 7):
        R = rm.matrix_from_quat(q)
        worst = max(worst, abs(rm.elevation_from_rotation(R, DOWN_AXIS) - rm.tilt_torsion_from_rotation(R).tilt))
    assert worst <= 1e-9


@given(unit_quats, unit_quats)
def test_elevation_matches_arccos_definition(q, p):
    R = rm.matrix_from_quat(q)
    v0 = rm.matrix_from_quat(p) @ DOWN_AXIS
    u = R @ v0
    expected = math.acos(max(-1.0, min(1.0, -u[2])))
    assert abs(rm.elevation_from_rotation(R, v0) - expected) <= 1e-7


@given(unit_quats, angles)
def test_elevation_ignores_world_twist(q, yaw):
    R = rm.matrix_from_quat(q)
    a = rm.elevation_from_rotation(R, DOWN_AXIS)
    b = rm.elevation_from_rotation(rm.rot_z(yaw) @ R, DOWN_AXIS)
    assert abs(a - b) <= 1e-12


# --- gyro integration -------------------------------------------------------------

def test_integrate_zero_rate_is_identity_step():
    R = rm.rot_x(0.2) @ rm.rot_z(1.0)
    np.testing.assert_array_equal(rm.integrate_gyro(R, [0.0, 0.0, 0.0], 0.01), R)


def test_integrate_quarter_turn():
    np.testing.assert_allclose(
        rm.integrate_gyro(np.eye(3), [math.pi / 2, 0, 0], 1.0), rm.rot_x(deg(90)), atol=1e-15
    )


def test_integrate_thousand_steps_about_z():
    R = np.eye(3)
    for _ in range(1000):
        R = rm.integrate_gyro(R, [0.0, 0.0, 0.1], 0.01)
    np.testing.assert_allclose(R, rm.rot_z(1.0), atol=1e-12)


def test_integrate_rejects_non_positive_dt():
    with pytest.raises(ValueError):
        rm.integrate_gyro(np.eye(3), [1.0, 0.0, 0.0], 0.0)


@given(unit_quats, st.lists(st.floats(-20, 20), min_size=3, max_size=3), st.floats(1e-4, 0.1))
def test_integrate_is_body_frame_exponential(q, w, dt):
    R = rm.matrix_from_quat(q)
    w = np.array(w)
    angle = np.linalg.norm(w) * dt
    step = np.eye(3) if angle == 0 else axis_angle_matrix(w, angle)
    np.testing.assert_allclose(rm.integrate_gyro(R, w, dt), R @ step, atol=1e-12)


def test_long_chains_stay_normalized():
    rng = np.random.default_rng(3)
    R = np.eye(3)
    q = np.array([1.0, 0.0, 0.0, 0.0])
    for w in rng.normal(0.0, 3.0, size=(100_000, 3)):
        R = rm.integrate_gyro(R, w, 0.01)
        q = rm.quat_normalize(rm.quat_multiply(q, rm.quat_from_rotvec(w * 0.01)))
    assert rm.orthonormality_error(R) <= 1e-9
    assert abs(np.linalg.det(R) - 1.0) <= 1e-9
    assert abs(np.dot(q, q) - 1.0) <= 1e-9
    # both chains describe the same rotation
    assert np.max(np.abs(rm.matrix_from_quat(q) - R)) <= 1e-9
