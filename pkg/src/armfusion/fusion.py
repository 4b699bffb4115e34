"""Streaming accelerometer/gyroscope fusion that outputs segment elevation.

Per sample the pipeline low-pass filters the acceleration, removes the
calibrated bias from the angular rate and band-pass filters it, then forms two
orientation estimates: a gravity-only tilt from the acceleration ratios and a
gyro propagation of the last fused orientation. Both are split into a world-Z
twist and a twist-free swing. The swings are blended with Slerp, the gyro twist
is re-applied, and elevation is read off the fused orientation.

The state is held as a unit quaternion, renormalized every step; each
matrix-level operation of the recipe has an exact quaternion counterpart.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .calibration import (
    DEFAULT_MIN_DURATION,
    GRAVITY,
    CalibrationResult,
    SensorSample,
    calibrate,
)
from .errors import ConfigurationError, StreamError
from .filters import FilterSpec, IIRFilter
from .rotmath import (
    elevation_from_rotation,
    matrix_from_quat,
    quat_from_matrix,
    quat_from_rotvec,
    quat_multiply,
    quat_normalize,
    slerp,
    swing_twist_z,
)

ACCEL_CUTOFF = 50.0
GYRO_BAND = (0.002, 50.0)
DEFAULT_SLERP_ALPHA = 0.01
DEFAULT_ALPHA_REF_RATE = 100.0
#: | |a| - g | above this fraction of g marks a sample as dynamic
DYNAMIC_ACCEL_FRACTION = 0.3
#: timestamp gaps longer than this many nominal periods are flagged
GAP_PERIODS = 3.0

FLAG_INVALID_GRAVITY = "invalid_gravity"
FLAG_DYNAMIC = "dynamic"
FLAG_GAP = "gap"


@dataclass(frozen=True)
class FusionConfig:
    """Tuning of the fusion pipeline.

    ``slerp_alpha`` is the accelerometer weight of one Slerp step at
    ``alpha_ref_rate``; at other rates the per-step weight is rescaled as
    ``1 - (1 - slerp_alpha) ** (dt * alpha_ref_rate)`` so the blend time
    constant does not depend on the sampling rate.
    """

    sample_rate: float
    accel_filter: FilterSpec
    gyro_filter: FilterSpec
    slerp_alpha: float = DEFAULT_SLERP_ALPHA
    alpha_ref_rate: float = DEFAULT_ALPHA_REF_RATE
    gravity: float = GRAVITY

    @classmethod
    def default(cls, sample_rate, **kwargs):
        return cls(
            sample_rate=sample_rate,
            accel_filter=FilterSpec.low_pass(ACCEL_CUTOFF, sample_rate),
            gyro_filter=FilterSpec.band_pass(GYRO_BAND[0], GYRO_BAND[1], sample_rate),
            **kwargs,
        )

    def with_alpha(self, slerp_alpha):
        return replace(self, slerp_alpha=slerp_alpha)

    def validate(self):
        if not self.sample_rate > 0:
            raise ConfigurationError(f"sample_rate must be positive, got {self.sample_rate}")
        if not 0.0 <= self.slerp_alpha <= 1.0:
            raise ConfigurationError(f"slerp_alpha must lie in [0, 1], got {self.slerp_alpha}")
        if not self.alpha_ref_rate > 0:
            raise ConfigurationError(f"alpha_ref_rate must be positive, got {self.alpha_ref_rate}")
        for spec in (self.accel_filter, self.gyro_filter):
            if not math.isclose(spec.sample_rate, self.sample_rate, rel_tol=1e-9):
                raise ConfigurationError(
                    f"filter designed for {spec.sample_rate} Hz but stream runs at {self.sample_rate} Hz"
                )

    def step_weight(self, dt):
        """Accelerometer Slerp weight for a step of ``dt`` seconds."""
        return 1.0 - (1.0 - self.slerp_alpha) ** (dt * self.alpha_ref_rate)


@dataclass(frozen=True)
class ElevationSample:
    t: float
    elevation: float
    R: np.ndarray
    flags: frozenset = field(default_factory=frozenset)


class FusionState:
    """Mutable state of one stream; build it with :func:`init`.

    Not thread-safe: feed samples from one owner, in timestamp order.
    """

    def __init__(self, config: FusionConfig, calib: CalibrationResult):
        config.validate()
        if math.isfinite(calib.sample_rate) and not math.isclose(
            calib.sample_rate, config.sample_rate, rel_tol=0.05
        ):
            raise ConfigurationError(
                f"calibration window sampled at {calib.sample_rate:.3f} Hz, "
                f"configuration expects {config.sample_rate} Hz"
            )
        self.config = config
        self.gyro_bias = np.array(calib.gyro_bias, dtype=float)
        self.v0 = np.array(calib.v0, dtype=float)
        self.q_current = quat_from_matrix(calib.R0)
        self.accel = IIRFilter(config.accel_filter)
        self.gyro = IIRFilter(config.gyro_filter)
        # continue from the still window rather than from an empty history
        self.accel.charge(calib.accel_mean)
        self.gyro.charge(np.zeros(3))
        self.last_t = None
        self.steps = 0

    @property
    def R_current(self):
        return matrix_from_quat(self.q_current)

    def step(self, s: SensorSample) -> ElevationSample:
        cfg = self.config
        nominal = 1.0 / cfg.sample_rate
        flags = set()
        if self.last_t is None:
            dt = nominal
        else:
            dt = s.t - self.last_t
            if not dt > 0:
                raise StreamError(f"timestamp {s.t} does not follow {self.last_t}")
            if dt > GAP_PERIODS * nominal:
                flags.add(FLAG_GAP)
        self.last_t = s.t

        a_f = self.accel.step(s.a)
        w_f = self.gyro.step(s.w - self.gyro_bias)

        a_norm = math.sqrt(a_f[0] * a_f[0] + a_f[1] * a_f[1] + a_f[2] * a_f[2])
        if abs(a_norm - cfg.gravity) > DYNAMIC_ACCEL_FRACTION * cfg.gravity:
            flags.add(FLAG_DYNAMIC)

        # gyro propagation, R_gyr = R_current @ exp([w dt]x), as a quaternion product
        q_gyr = quat_multiply(self.q_current, quat_from_rotvec(w_f * dt))
        twist_gyr, swing_gyr = swing_twist_z(q_gyr)
        if a_norm > 0.5 * cfg.gravity:
            # tilt from acceleration ratios, R_acc = Ry(pitch) @ Rx(roll); its
            # twist about world Z carries no information and is dropped
            q_acc = accel_tilt_quat(a_f)
            _, swing_acc = swing_twist_z(q_acc)
            q_fused = slerp(swing_gyr, swing_acc, cfg.step_weight(dt))
        else:
            flags.add(FLAG_INVALID_GRAVITY)
            q_fused = swing_gyr

        self.q_current = quat_normalize(quat_multiply(twist_gyr, q_fused))
        self.steps += 1
        R = matrix_from_quat(self.q_current)
        return ElevationSample(s.t, elevation_from_rotation(R, self.v0), R, frozenset(flags))


def accel_tilt_quat(a):
    """Quaternion of :func:`~armfusion.calibration.orientation_from_accel` (no gravity check)."""
    roll = math.atan2(a[1], a[2])
    pitch = math.atan2(-a[0], math.hypot(a[1], a[2]))
    cr, sr = math.cos(0.5 * roll), math.sin(0.5 * roll)
    cp, sp = math.cos(0.5 * pitch), math.sin(0.5 * pitch)
    # q_y(pitch) * q_x(roll)
    return np.array([cp * cr, cp * sr, sp * cr, -sp * sr])


def init(config: FusionConfig, calib: CalibrationResult) -> FusionState:
    """Fusion state starting at the calibrated orientation."""
    return FusionState(config, calib)


def step(state: FusionState, sample: SensorSample) -> ElevationSample:
    return state.step(sample)


def run(config, calib_window, stream, min_duration=DEFAULT_MIN_DURATION):
    """Calibrate on ``calib_window`` then fuse every sample of ``stream``.

    Returns one :class:`ElevationSample` per sample of ``stream``.
    """
    calib = calibrate(calib_window, min_duration=min_duration, g=config.gravity)
    state = init(config, calib)
    return [state.step(s) for s in stream]


def split_calibration(samples, duration=DEFAULT_MIN_DURATION):
    """Split a recording into its leading still window and the remainder.

    The window holds the first ``round(duration * rate)`` samples, with the
    rate taken from the median timestamp spacing.
    """
    samples = list(samples)
    if len(samples) < 2:
        return samples, []
    t = np.array([s.t for s in samples[: min(len(samples), 1000)]])
    rate = 1.0 / float(np.median(np.diff(t)))
    n = int(round(duration * rate))
    return samples[:n], samples[n:]


def elevations(out):
    """Arrays ``(t, elevation)`` from a sequence of :class:`ElevationSample`."""
    return (np.array([e.t for e in out], dtype=float), np.array([e.elevation for e in out], dtype=float))
