"""First-order IIR low-pass and band-pass filters for 3-axis sensor streams.

Both filters are discretized with the bilinear transform using frequency
pre-warping, so the -3 dB point of the digital filter lands exactly on the
requested cutoff. The band-pass is a first-order high-pass cascaded with a
first-order low-pass.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError

logger = logging.getLogger(__name__)

#: cutoffs above this fraction of the sample rate are clamped down to it
NYQUIST_CLAMP = 0.45

_clamp_warned = set()


@dataclass(frozen=True)
class FilterSpec:
    """Analog prototype of a first-order filter.

    Parameters
    ----------
    kind : {"low-pass", "band-pass"}
    f_high : float
        Low-pass corner in Hz (upper edge of the band-pass).
    sample_rate : float
        Sampling rate of the stream in Hz.
    f_low : float, optional
        High-pass corner in Hz; required for band-pass.
    """

    kind: str
    f_high: float
    sample_rate: float
    f_low: Optional[float] = None

    @classmethod
    def low_pass(cls, f_high, sample_rate):
        return cls("low-pass", f_high, sample_rate)

    @classmethod
    def band_pass(cls, f_low, f_high, sample_rate):
        return cls("band-pass", f_high, sample_rate, f_low)

    def with_rate(self, sample_rate):
        return FilterSpec(self.kind, self.f_high, sample_rate, self.f_low)


@dataclass(frozen=True)
class Section:
    """One first-order section ``y[n] = b0 x[n] + b1 x[n-1] - a1 y[n-1]``."""

    b0: float
    b1: float
    a1: float

    @property
    def dc_gain(self):
        return (self.b0 + self.b1) / (1.0 + self.a1)


def effective_cutoff(f_high, sample_rate):
    """Low-pass corner after clamping to ``NYQUIST_CLAMP * sample_rate``.

    A clamp is logged as a warning once per (cutoff, rate) pair.
    """
    limit = NYQUIST_CLAMP * sample_rate
    if f_high > limit:
        if (f_high, sample_rate) in _clamp_warned:
            return limit
        _clamp_warned.add((f_high, sample_rate))
        logger.warning(
            "cutoff %.4g Hz is too close to Nyquist at %.4g Hz sampling; clamped to %.4g Hz",
            f_high, sample_rate, limit,
        )
        return limit
    return f_high


def _warp(fc, fs):
    # bilinear constant tan(pi fc / fs): analog corner pre-warped onto the digital one
    return math.tan(math.pi * fc / fs)


def _low_pass_section(fc, fs):
    k = _warp(fc, fs)
    b = k / (1.0 + k)
    return Section(b, b, (k - 1.0) / (k + 1.0))


def _high_pass_section(fc, fs):
    k = _warp(fc, fs)
    b = 1.0 / (1.0 + k)
    return Section(b, -b, (k - 1.0) / (k + 1.0))


def design(spec: FilterSpec) -> tuple[Section, ...]:
    """Difference-equation coefficients for ``spec``, as a cascade of sections.

    Raises
    ------
    ConfigurationError
        On non-positive rates or cutoffs, a band-pass without ``f_low``, or a
        band whose lower edge is not below the (clamped) upper edge.
    """
    fs = spec.sample_rate
    if not fs > 0:
        raise ConfigurationError(f"sample rate must be positive, got {fs}")
    if not spec.f_high > 0:
        raise ConfigurationError(f"cutoff must be positive, got {spec.f_high}")
    f_high = effective_cutoff(spec.f_high, fs)
    if spec.kind == "low-pass":
        return (_low_pass_section(f_high, fs),)
    if spec.kind == "band-pass":
        f_low = spec.f_low
        if f_low is None or not f_low > 0:
            raise ConfigurationError(f"band-pass needs a positive f_low, got {f_low}")
        if f_low >= fs / 2.0:
            raise ConfigurationError(f"f_low {f_low} Hz is at or above Nyquist ({fs / 2.0} Hz)")
        if f_low >= f_high:
            raise ConfigurationError(
                f"band-pass edges out of order: f_low {f_low} Hz >= f_high {f_high} Hz"
            )
        return (_high_pass_section(f_low, fs), _low_pass_section(f_high, fs))
    raise ConfigurationError(f"unknown filter kind {spec.kind!r}")


def frequency_response(sections, f, sample_rate):
    """Complex response of a section cascade at frequency ``f`` (Hz)."""
    z1 = np.exp(-2j * np.pi * np.asarray(f, dtype=float) / sample_rate)
    h = 1.0 + 0j
    for s in sections:
        h = h * (s.b0 + s.b1 * z1) / (1.0 + s.a1 * z1)
    return h


class IIRFilter:
    """Streaming per-axis filter with its own delay line.

    Parameters
    ----------
    spec : FilterSpec
    n_axes : int
        Width of each input sample (3 for a tri-axial sensor).
    precharge : bool
        If set, the first sample after construction or :meth:`reset` fills the
        delay line with the steady state of a constant input equal to that
        sample, so a DC signal produces no start-up transient.
    """

    def __init__(self, spec: FilterSpec, n_axes=3, precharge=True):
        self.spec = spec
        self.sections = design(spec)
        self.n_axes = n_axes
        self.precharge = precharge
        self.reset()

    def reset(self):
        """Zero the history; the next sample re-arms pre-charging if enabled."""
        k = len(self.sections)
        self._x = [[0.0] * self.n_axes for _ in range(k)]
        self._y = [[0.0] * self.n_axes for _ in range(k)]
        self._armed = self.precharge

    def _row(self, x):
        if isinstance(x, np.ndarray) and x.shape == (self.n_axes,):
            return x.tolist()
        return np.broadcast_to(np.asarray(x, dtype=float), (self.n_axes,)).tolist()

    def charge(self, x):
        """Load the steady state of a constant input ``x`` into the delay line."""
        v = self._row(x)
        for i, s in enumerate(self.sections):
            self._x[i] = list(v)
            v = [s.dc_gain * c for c in v]
            self._y[i] = list(v)
        self._armed = False

    def step(self, x):
        """Filter one sample; returns a new array."""
        if self._armed:
            self.charge(x)
        v = self._row(x)
        for i, s in enumerate(self.sections):
            xp, yp = self._x[i], self._y[i]
            y = [s.b0 * v[j] + s.b1 * xp[j] - s.a1 * yp[j] for j in range(self.n_axes)]
            self._x[i] = v
            self._y[i] = y
            v = y
        return np.array(v)

    def filter(self, xs):
        """Run :meth:`step` over the rows of ``xs``."""
        xs = np.asarray(xs, dtype=float)
        return np.array([self.step(x) for x in xs]).reshape(xs.shape)
