"""Static calibration: gyroscope bias and gravity-referenced initial orientation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, InvalidGravityError, NotStillError, StreamError
from .rotmath import rot_x, rot_y

GRAVITY = 9.80665
#: per-axis gyro standard deviation (rad/s) above which the window counts as moving
STILLNESS_GYRO_STD = 0.05
DEFAULT_MIN_DURATION = 2.0


@dataclass(frozen=True)
class SensorSample:
    """One IMU tick: time (s), specific force ``a`` (m/s^2), angular rate ``w`` (rad/s)."""

    t: float
    a: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).reshape(3)
        w = np.asarray(self.w, dtype=float).reshape(3)
        if not (math.isfinite(self.t) and np.all(np.isfinite(a)) and np.all(np.isfinite(w))):
            raise StreamError(f"non-finite sample at t={self.t}")
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "w", w)


@dataclass(frozen=True)
class CalibrationResult:
    """Outcome of a still window.

    ``v0`` is the sensor-frame axis that points to world-down at calibration,
    i.e. the segment long axis when the arm hangs in the anatomical pose.
    """

    gyro_bias: np.ndarray
    R0: np.ndarray
    v0: np.ndarray
    accel_mean: np.ndarray
    accel_std: np.ndarray
    gyro_std: np.ndarray
    duration: float
    sample_rate: float
    n: int = field(default=0)


def orientation_from_accel(a, g=GRAVITY):
    """Gravity-only tilt estimate from a specific-force reading.

    Roll and pitch follow from the acceleration ratios,
    ``roll = atan2(ay, az)`` and ``pitch = atan2(-ax, hypot(ay, az))``; yaw is
    unobservable and set to 0. Returns ``R = Ry(pitch) @ Rx(roll)``, which maps
    the measured direction onto world +Z.

    Raises
    ------
    InvalidGravityError
        If ``|a| <= 0.5 g``.
    """
    ax, ay, az = (float(c) for c in a)
    norm = math.sqrt(ax * ax + ay * ay + az * az)
    if not norm > 0.5 * g:
        raise InvalidGravityError(f"|a| = {norm:.4g} m/s^2 is too small to define gravity")
    roll = math.atan2(ay, az)
    pitch = math.atan2(-ax, math.hypot(ay, az))
    return rot_y(pitch) @ rot_x(roll)


def _window_duration(t):
    # span covered by n uniformly spaced samples, n * mean spacing
    n = len(t)
    if n < 2:
        return 0.0, float("nan")
    dt = (t[-1] - t[0]) / (n - 1)
    return n * dt, 1.0 / dt


def _shifted_mean(x):
    # mean about the first row: exact for constant input, less cancellation otherwise
    return x[0] + (x - x[0]).mean(axis=0)


def calibrate(samples, min_duration=DEFAULT_MIN_DURATION, gyro_std_max=STILLNESS_GYRO_STD, g=GRAVITY):
    """Estimate gyro bias and the resting orientation from a still window.

    Parameters
    ----------
    samples : sequence of SensorSample
        The still window, timestamps strictly increasing.
    min_duration : float
        Minimum covered duration in seconds.
    gyro_std_max : float
        Stillness gate on the per-axis gyro standard deviation (rad/s).

    Returns
    -------
    CalibrationResult
        ``gyro_bias`` is the per-axis mean angular rate, ``R0`` the tilt of the
        mean acceleration and ``v0 = -mean(a) / |mean(a)|``.
    """
    samples = list(samples)
    t = np.array([s.t for s in samples], dtype=float)
    if len(t) > 1 and np.any(np.diff(t) <= 0):
        raise StreamError("calibration timestamps are not strictly increasing")
    duration, rate = _window_duration(t)
    if duration < min_duration - 1e-9:
        raise InsufficientDataError(
            f"calibration window covers {duration:.3f} s, need at least {min_duration:.3f} s"
        )
    acc = np.array([s.a for s in samples])
    gyr = np.array([s.w for s in samples])
    gyro_std = gyr.std(axis=0)
    if np.any(gyro_std > gyro_std_max):
        raise NotStillError(
            "motion detected during calibration: gyro std "
            f"{np.array2string(gyro_std, precision=4)} rad/s exceeds {gyro_std_max} rad/s",
            gyro_std=gyro_std,
        )
    a_mean = _shifted_mean(acc)
    R0 = orientation_from_accel(a_mean, g=g)
    return CalibrationResult(
        gyro_bias=_shifted_mean(gyr),
        R0=R0,
        v0=-a_mean / np.linalg.norm(a_mean),
        accel_mean=a_mean,
        accel_std=acc.std(axis=0),
        gyro_std=gyro_std,
        duration=duration,
        sample_rate=rate,
        n=len(samples),
    )
