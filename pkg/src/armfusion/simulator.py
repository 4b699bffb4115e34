"""Synthetic shoulder tasks with exact ground truth and simulated IMU streams.

World frame: X forward, Y left, Z up. The sensor frame coincides with the world
frame in the anatomical pose (arm hanging, ``R = I``) and the arm long axis is
the sensor ``-Z`` axis, so elevation is the angle of ``R @ (0, 0, -1)`` from
straight down. Sensors sit on the right arm at ``lever_arm`` metres from the
shoulder pivot.

Task catalogue (defaults from :func:`task_profile`):

====  ==========================================================  ========
task  motion                                                      quasi-
                                                                  static
====  ==========================================================  ========
1, 3  flexion, raised cosine 0 -> amplitude, 1 Hz / 3 Hz
4, 6  abduction, raised cosine 0 -> amplitude, 1 Hz / 3 Hz
2     external rotation (twist about the arm) at 90 deg flexion    yes
5     external rotation at 90 deg abduction                        yes
7     trunk flexion, arm held at 45 deg, shoulder translating      yes
8, 9  "Z" traced clockwise / counterclockwise, 5 repetitions
10    nine 300 ms throwing bursts of +/-60 deg about 90 deg
====  ==========================================================  ========
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .calibration import GRAVITY, SensorSample
from .errors import ConfigurationError
from .rotmath import (
    elevation_from_rotation,
    matrix_from_quat,
    quat_from_matrix,
    rot_x,
    rot_y,
    rot_z,
    rotvec_from_matrix,
    slerp,
)

ARM_AXIS = np.array([0.0, 0.0, -1.0])
TASK_IDS = tuple(range(1, 11))
QUASI_STATIC_TASKS = (2, 5, 7)
SLOW_TASKS = (1, 2, 4, 5, 7, 8, 9)
FAST_TASKS = (3, 6, 10)

TASK_NAMES = {
    1: "Flexion (1 Hz)",
    2: "Ext. rotation at 90 deg flexion (1 Hz)",
    3: "Flexion (3 Hz)",
    4: "Abduction (1 Hz)",
    5: "Ext. rotation at 90 deg abduction (1 Hz)",
    6: "Abduction (3 Hz)",
    7: "Trunk flexion, static arm",
    8: "Z movements clockwise",
    9: "Z movements counterclockwise",
    10: "Ball throws",
}


@dataclass(frozen=True)
class MotionProfile:
    """Parameters of one synthetic task.

    ``amplitude`` is the elevation swing for tasks 1, 3, 4, 6 and 10 and the
    twist swing for tasks 2 and 5. ``lead_in`` is the time spent moving from the
    anatomical pose to the task's starting pose; it is skipped when the task
    starts in the anatomical pose.
    """

    task_id: int
    amplitude: float
    frequency: float
    duration: float
    plane: str
    prelude_still: float = 2.0
    lever_arm: float = 0.25
    lead_in: float = 1.0
    hold_elevation: float = math.radians(90.0)
    burst_duration: float = 0.3
    repetitions: int = 0

    def validate(self, min_prelude=2.0):
        if self.task_id not in TASK_IDS:
            raise ConfigurationError(f"unknown task id {self.task_id}; expected 1..10")
        if not self.frequency > 0:
            raise ConfigurationError(f"frequency must be positive, got {self.frequency}")
        if not self.duration > 0:
            raise ConfigurationError(f"duration must be positive, got {self.duration}")
        if self.prelude_still < min_prelude - 1e-12:
            raise ConfigurationError(
                f"prelude_still {self.prelude_still} s is shorter than the calibration window {min_prelude} s"
            )
        if self.plane not in ("flexion", "abduction", "compound"):
            raise ConfigurationError(f"unknown plane {self.plane!r}")


def task_profile(task_id, **overrides):
    """Default :class:`MotionProfile` for a task id in 1..10."""
    deg = math.radians
    table = {
        1: dict(amplitude=deg(90), frequency=1.0, duration=30.0, plane="flexion"),
        2: dict(amplitude=deg(60), frequency=1.0, duration=30.0, plane="flexion"),
        3: dict(amplitude=deg(90), frequency=3.0, duration=30.0, plane="flexion"),
        4: dict(amplitude=deg(90), frequency=1.0, duration=30.0, plane="abduction"),
        5: dict(amplitude=deg(60), frequency=1.0, duration=30.0, plane="abduction"),
        6: dict(amplitude=deg(90), frequency=3.0, duration=30.0, plane="abduction"),
        7: dict(amplitude=deg(30), frequency=0.2, duration=30.0, plane="flexion",
                hold_elevation=deg(45)),
        8: dict(amplitude=deg(25), frequency=1.0, duration=20.0, plane="compound", repetitions=5),
        9: dict(amplitude=deg(25), frequency=1.0, duration=20.0, plane="compound", repetitions=5),
        10: dict(amplitude=deg(60), frequency=1.0 / 3.0, duration=27.0, plane="abduction",
                 repetitions=9),
    }
    if task_id not in table:
        raise ConfigurationError(f"unknown task id {task_id}; expected 1..10")
    params = dict(table[task_id])
    params.update(overrides)
    profile = MotionProfile(task_id=task_id, **params)
    profile.validate()
    return profile


@dataclass(frozen=True)
class NoiseModel:
    """Sensor imperfections added by :func:`synthesize_imu`.

    Defaults are typical MEMS magnitudes: accelerometer white noise of 0.02 g,
    gyro white noise of 0.005 rad/s and a constant gyro bias of 0.01 rad/s per
    axis (removed by calibration). ``gyro_bias_drift`` is a linear bias ramp in
    rad/s per second, starting at the first sample. ``late_gyro_bias`` (rad/s)
    switches on when the still prelude ends, so calibration cannot see it.
    """

    accel_noise_sigma: float = 0.02 * GRAVITY
    gyro_noise_sigma: float = 0.005
    gyro_bias: tuple = (0.01, 0.01, 0.01)
    gyro_bias_drift: tuple = (0.0, 0.0, 0.0)
    seed: int = 0
    late_gyro_bias: tuple = (0.0, 0.0, 0.0)

    @classmethod
    def ideal(cls):
        return cls(0.0, 0.0, (0.0, 0.0, 0.0), (0.0, 0.0, 0.0), 0)

    def with_seed(self, seed):
        return replace(self, seed=seed)


@dataclass
class GroundTruth:
    """Exact orientation and elevation of a task, sampled at ``rate``.

    ``t``, ``R``, ``elevation`` and ``pivot`` cover the task itself, starting at
    ``t = 0``. The ``lead_*`` arrays hold the transition from the anatomical pose
    that precedes it (empty when none is needed).
    """

    profile: MotionProfile
    rate: float
    t: np.ndarray
    R: np.ndarray
    elevation: np.ndarray
    pivot: np.ndarray
    v0: np.ndarray = field(default_factory=lambda: ARM_AXIS.copy())
    lead_t: np.ndarray = field(default_factory=lambda: np.zeros(0))
    lead_R: np.ndarray = field(default_factory=lambda: np.zeros((0, 3, 3)))
    lead_pivot: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))

    def __len__(self):
        return len(self.t)


# --- waveforms ------------------------------------------------------------

def raised_cosine(t, frequency, amplitude):
    """``amplitude / 2 * (1 - cos(2 pi f t))``: 0 at t = 0, peak at half period."""
    return 0.5 * amplitude * (1.0 - math.cos(2.0 * math.pi * frequency * t))


def ease(u):
    """C1 ramp from 0 to 1 on [0, 1] with zero slope at both ends."""
    u = min(max(u, 0.0), 1.0)
    return 0.5 * (1.0 - math.cos(math.pi * u))


_BURST_PEAK = 3.0 * math.sqrt(3.0) / 8.0


def throw_burst(u):
    """Single out-and-back burst on [0, 1], peak magnitude 1, C1 at the ends."""
    if u <= 0.0 or u >= 1.0:
        return 0.0
    x = 2.0 * math.pi * u
    return math.sin(x) * 0.5 * (1.0 - math.cos(x)) / _BURST_PEAK


def _elevation_matrix(plane, elevation):
    # flexion raises the arm forward (+X), abduction of the right arm sideways (-Y)
    if plane == "abduction":
        return rot_x(-elevation)
    return rot_y(-elevation)


def _z_corners(task_id, half_width, low, high):
    # (azimuth, elevation) corners; positive azimuth swings the arm to the left
    tl, tr = (half_width, high), (-half_width, high)
    bl, br = (half_width, low), (-half_width, low)
    if task_id == 8:
        return [tl, tr, bl, br]
    return [tr, tl, br, bl]


def _z_pose(profile, t):
    corners = _z_corners(profile.task_id, profile.amplitude, math.radians(60), math.radians(110))
    stroke = 1.0 / profile.frequency
    cycle = corners + [corners[0]]  # four strokes, the last one returning to the start
    k = int(math.floor(t / stroke))
    u = ease(t / stroke - k)
    a = cycle[k % 4]
    b = cycle[k % 4 + 1]
    azimuth = a[0] + (b[0] - a[0]) * u
    elevation = a[1] + (b[1] - a[1]) * u
    return rot_z(azimuth) @ rot_y(-elevation)


def pose(profile: MotionProfile, t: float):
    """Orientation and shoulder-pivot position of ``profile`` at time ``t >= 0``."""
    task = profile.task_id
    pivot = np.zeros(3)
    if task in (1, 3, 4, 6):
        R = _elevation_matrix(profile.plane, raised_cosine(t, profile.frequency, profile.amplitude))
    elif task in (2, 5):
        twist = raised_cosine(t, profile.frequency, profile.amplitude)
        R = _elevation_matrix(profile.plane, profile.hold_elevation) @ rot_z(twist)
    elif task == 7:
        # the trunk pitches about the hips (0.5 m below the shoulder) while the
        # arm holds its elevation with a residual wobble of +/-0.5 deg
        trunk = raised_cosine(t, profile.frequency, profile.amplitude)
        wobble = math.radians(0.5) * math.sin(2.0 * math.pi * profile.frequency * t)
        R = _elevation_matrix(profile.plane, profile.hold_elevation + wobble)
        pivot = 0.5 * np.array([math.sin(trunk), 0.0, math.cos(trunk) - 1.0])
    elif task in (8, 9):
        R = _z_pose(profile, t)
    elif task == 10:
        period = 1.0 / profile.frequency
        k = int(math.floor(t / period))
        burst = 0.0
        if k < profile.repetitions:
            # each throw starts one second into its period
            burst = throw_burst((t - k * period - 1.0) / profile.burst_duration)
        R = _elevation_matrix(profile.plane, profile.hold_elevation + profile.amplitude * burst)
    else:
        raise ConfigurationError(f"unknown task id {task}; expected 1..10")
    return R, pivot


def _grid(duration, rate):
    n = int(round(duration * rate))
    return np.arange(n) / rate


def trajectory(profile: MotionProfile, rate: float) -> GroundTruth:
    """Sample a task's exact orientation and elevation at ``rate`` Hz."""
    profile.validate()
    if not rate > 0:
        raise ConfigurationError(f"rate must be positive, got {rate}")
    t = _grid(profile.duration, rate)
    poses = [pose(profile, ti) for ti in t]
    R = np.array([p[0] for p in poses])
    pivot = np.array([p[1] for p in poses])
    elev = np.array([elevation_from_rotation(Ri, ARM_AXIS) for Ri in R])

    truth = GroundTruth(profile=profile, rate=rate, t=t, R=R, elevation=elev, pivot=pivot)
    R_start = R[0]
    if not np.allclose(R_start, np.eye(3), atol=1e-12) and profile.lead_in > 0:
        # slerp from the anatomical pose into the starting pose, eased at both ends
        q_start = quat_from_matrix(R_start)
        q_id = np.array([1.0, 0.0, 0.0, 0.0])
        lead_t = _grid(profile.lead_in, rate) - profile.lead_in
        lead_R = np.array(
            [matrix_from_quat(slerp(q_id, q_start, ease((ti + profile.lead_in) / profile.lead_in)))
             for ti in lead_t]
        )
        truth.lead_t = lead_t
        truth.lead_R = lead_R
        truth.lead_pivot = np.zeros((len(lead_t), 3))
    return truth


@dataclass
class ImuRecording:
    """Simulated IMU stream as arrays, iterable as :class:`SensorSample`.

    ``n_still`` leading samples form the calibration window.
    """

    t: np.ndarray
    acc: np.ndarray
    gyr: np.ndarray
    rate: float
    n_still: int

    def __len__(self):
        return len(self.t)

    def __iter__(self):
        for i in range(len(self.t)):
            yield SensorSample(self.t[i], self.acc[i], self.gyr[i])

    def samples(self, start=0, stop=None):
        stop = len(self.t) if stop is None else stop
        return [SensorSample(self.t[i], self.acc[i], self.gyr[i]) for i in range(start, stop)]

    def calibration_window(self):
        return self.samples(0, self.n_still)

    def stream(self):
        return self.samples(self.n_still)


def _body_rates(R, dt):
    # backward-difference log map: the rate that carries R[k-1] exactly onto R[k]
    w = np.zeros((len(R), 3))
    for k in range(1, len(R)):
        w[k] = rotvec_from_matrix(R[k - 1].T @ R[k]) / dt
    return w


def _second_difference(p, dt):
    acc = np.zeros_like(p)
    if len(p) >= 3:
        acc[1:-1] = (p[2:] - 2.0 * p[1:-1] + p[:-2]) / (dt * dt)
        acc[-1] = acc[-2]
    return acc


def synthesize_imu(truth: GroundTruth, noise: Optional[NoiseModel] = None, g=GRAVITY) -> ImuRecording:
    """Inverse sensor model: specific force and body rates along ``truth``.

    A still anatomical-pose prelude of ``profile.prelude_still`` seconds and the
    lead-in transition are prepended. Specific force is
    ``R.T @ (g * z + p_ddot)`` with ``p`` the sensor position (pivot plus lever
    arm); rates come from the log map of consecutive orientations. Bias, bias
    drift and white noise are then added from ``noise`` using its seed.
    """
    noise = NoiseModel() if noise is None else noise
    profile = truth.profile
    rate = truth.rate
    dt = 1.0 / rate
    n_still = int(round(profile.prelude_still * rate))
    n_pre = n_still + len(truth.lead_t)
    t0 = -(n_pre / rate)
    t = np.concatenate((t0 + np.arange(n_still) / rate, truth.lead_t, truth.t))
    R = np.concatenate((np.tile(np.eye(3), (n_still, 1, 1)), truth.lead_R, truth.R))
    pivot = np.concatenate((np.zeros((n_still, 3)), truth.lead_pivot, truth.pivot))

    gyr = _body_rates(R, dt)
    position = pivot + profile.lever_arm * np.einsum("kij,j->ki", R, truth.v0)
    f_world = _second_difference(position, dt)
    f_world[:, 2] += g
    acc = np.einsum("kji,kj->ki", R, f_world)

    rng = np.random.default_rng(noise.seed)
    n = len(t)
    acc = acc + rng.normal(0.0, 1.0, (n, 3)) * noise.accel_noise_sigma
    white = rng.normal(0.0, 1.0, (n, 3)) * noise.gyro_noise_sigma
    bias = np.asarray(noise.gyro_bias, dtype=float) + np.outer(t - t[0], noise.gyro_bias_drift)
    bias[n_still:] += np.asarray(noise.late_gyro_bias, dtype=float)
    gyr = gyr + bias + white
    return ImuRecording(t=t, acc=acc, gyr=gyr, rate=rate, n_still=n_still)


def simulate(task_id, rate, noise=None, **overrides):
    """Ground truth and IMU recording for a task with default parameters."""
    truth = trajectory(task_profile(task_id, **overrides), rate)
    return truth, synthesize_imu(truth, noise)
