import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from armfusion import rotmath as rm
from armfusion.calibration import GRAVITY, SensorSample, calibrate, orientation_from_accel
from armfusion.errors import (
    InsufficientDataError,
    InvalidGravityError,
    NotStillError,
    StreamError,
)
from conftest import unit_quats

RATE = 100.0


def window(acc, gyr, n=200, rate=RATE, t0=0.0):
    acc = np.broadcast_to(np.asarray(acc, float), (n, 3))
    gyr = np.broadcast_to(np.asarray(gyr, float), (n, 3))
    return [SensorSample(t0 + i / rate, acc[i], gyr[i]) for i in range(n)]


def test_constant_window_bias_and_down_axis():
    res = calibrate(window([0.0, 0.0, 9.81], [0.01, -0.02, 0.005]))
    np.testing.assert_array_equal(res.gyro_bias, [0.01, -0.02, 0.005])
    # the axis that points to world-down is opposite the measured reaction
    np.testing.assert_array_equal(res.v0, [0.0, 0.0, -1.0])
    assert res.duration == pytest.approx(2.0)
    assert res.sample_rate == pytest.approx(RATE)
    assert res.n == 200


def test_level_still_window_gives_identity():
    res = calibrate(window([0.0, 0.0, 9.81], [0.0, 0.0, 0.0]))
    np.testing.assert_array_equal(res.gyro_bias, [0.0, 0.0, 0.0])
    np.testing.assert_array_equal(res.R0, np.eye(3))
    assert rm.elevation_from_rotation(res.R0, res.v0) == 0.0


def test_noisy_bias_within_standard_error():
    sigma, n = 0.01, 1000
    rng = np.random.default_rng(5)
    gyr = rng.normal(0.0, sigma, size=(n, 3))
    acc = np.tile([0.0, 0.0, GRAVITY], (n, 1))
    res = calibrate([SensorSample(i / RATE, acc[i], gyr[i]) for i in range(n)])
    assert np.all(np.abs(res.gyro_bias) <= 3 * sigma / math.sqrt(n))
    np.testing.assert_allclose(res.gyro_std, gyr.std(axis=0))


def test_bias_error_shrinks_as_inverse_root_n():
    sigma, trials = 0.01, 120
    rng = np.random.default_rng(9)
    sizes = [100, 400, 1600]
    spread = []
    for n in sizes:
        est = []
        for _ in range(trials):
            gyr = rng.normal(0.0, sigma, size=(n, 3))
            samples = [SensorSample(i / RATE, (0.0, 0.0, GRAVITY), gyr[i]) for i in range(n)]
            est.append(calibrate(samples, min_duration=0.5).gyro_bias)
        spread.append(float(np.std(np.array(est))))
    slope = np.polyfit(np.log(sizes), np.log(spread), 1)[0]
    assert abs(slope + 0.5) < 0.1
    for n, s in zip(sizes, spread):
        assert s == pytest.approx(sigma / math.sqrt(n), rel=0.15)


def test_tilted_window_recovers_tilt_and_axis():
    R_true = rm.rot_y(0.3) @ rm.rot_x(-0.2)
    a = R_true.T @ [0.0, 0.0, GRAVITY]
    res = calibrate(window(a, [0.0, 0.0, 0.0]))
    assert abs(np.linalg.norm(res.v0) - 1.0) <= 1e-9
    assert rm.orthonormality_error(res.R0) <= 1e-9
    # R0 maps the stored down axis onto world down
    np.testing.assert_allclose(res.R0 @ res.v0, [0.0, 0.0, -1.0], atol=1e-12)


def test_short_window_rejected():
    with pytest.raises(InsufficientDataError):
        calibrate(window([0, 0, GRAVITY], [0, 0, 0], n=150))
    with pytest.raises(InsufficientDataError):
        calibrate([])


def test_min_duration_is_configurable():
    res = calibrate(window([0, 0, GRAVITY], [0, 0, 0], n=50), min_duration=0.5)
    assert res.duration == pytest.approx(0.5)


def test_moving_window_rejected_with_stats():
    t = np.arange(200) / RATE
    gyr = np.column_stack((0.5 * np.sin(2 * np.pi * t), np.zeros(200), np.zeros(200)))
    samples = [SensorSample(t[i], (0, 0, GRAVITY), gyr[i]) for i in range(200)]
    with pytest.raises(NotStillError) as info:
        calibrate(samples)
    assert info.value.gyro_std[0] > 0.05
    assert "gyro std" in str(info.value)


def test_free_fall_window_rejected():
    with pytest.raises(InvalidGravityError):
        calibrate(window([0.0, 0.1, 0.2], [0, 0, 0]))


def test_non_monotonic_timestamps_rejected():
    samples = window([0, 0, GRAVITY], [0, 0, 0])
    samples[10], samples[11] = samples[11], samples[10]
    with pytest.raises(StreamError):
        calibrate(samples)


def test_non_finite_sample_rejected():
    with pytest.raises(StreamError):
        SensorSample(0.0, [0.0, float("nan"), 9.8], [0.0, 0.0, 0.0])


# --- orientation from acceleration -------------------------------------------------

def test_level_reading_is_identity():
    np.testing.assert_array_equal(orientation_from_accel([0.0, 0.0, GRAVITY]), np.eye(3))


def test_negative_x_reading_is_pitch_up_quarter_turn():
    R = orientation_from_accel([-GRAVITY, 0.0, 0.0])
    np.testing.assert_allclose(R, rm.rot_y(math.pi / 2), atol=1e-15)


def test_roll_from_y_reading():
    R = orientation_from_accel([0.0, GRAVITY, 0.0])
    np.testing.assert_allclose(R, rm.rot_x(math.pi / 2), atol=1e-15)


def test_weak_reading_rejected():
    with pytest.raises(InvalidGravityError):
        orientation_from_accel([0.0, 0.0, 0.5 * GRAVITY])


@given(unit_quats)
def test_recovers_orientation_up_to_world_twist(q):
    R_true = rm.matrix_from_quat(q)
    R = orientation_from_accel(R_true.T @ [0.0, 0.0, GRAVITY])
    assert rm.is_rotation(R, 1e-12)
    _, Rxy = rm.decompose_z_xy(R @ R_true.T)
    assert np.max(np.abs(Rxy - np.eye(3))) <= 1e-6
    # the recovered matrix maps the reading back onto world up
    np.testing.assert_allclose(R @ (R_true.T @ [0, 0, 1.0]), [0, 0, 1.0], atol=1e-12)


@given(unit_quats, st.floats(0.51, 50.0))
def test_scale_invariance(q, k):
    a = rm.matrix_from_quat(q).T @ [0.0, 0.0, GRAVITY]
    np.testing.assert_allclose(orientation_from_accel(k * a), orientation_from_accel(a), atol=1e-12)
