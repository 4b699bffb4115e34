"""Agreement statistics between an estimated and a reference elevation trace.

All angles are radians unless a function says otherwise. Traces compared by
:func:`rmse`, :func:`avg_abs_error` and :func:`cross_correlation` must already
share a uniform grid; :func:`align` puts two traces on the grid of the slower one.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import RangeError, ShapeError

QUASI_STATIC_P2P = math.radians(2.0)
DEFAULT_MAX_LAG = 0.5


@dataclass
class ElevationTrace:
    """Timestamped elevation samples with a nominal rate (Hz)."""

    t: np.ndarray
    elevation: np.ndarray
    rate: float

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.elevation = np.asarray(self.elevation, dtype=float)
        if self.t.shape != self.elevation.shape or self.t.ndim != 1:
            raise ShapeError("trace times and values must be 1-D arrays of equal length")
        if len(self.t) > 1 and np.any(np.diff(self.t) <= 0):
            raise ValueError("trace timestamps must be strictly increasing")

    def __len__(self):
        return len(self.t)

    @classmethod
    def from_samples(cls, t, elevation, rate=None):
        t = np.asarray(t, dtype=float)
        if rate is None:
            rate = 1.0 / float(np.median(np.diff(t)))
        return cls(t, elevation, rate)

    @property
    def span(self):
        return float(self.t[0]), float(self.t[-1])

    def peak_to_peak(self):
        return float(np.ptp(self.elevation)) if len(self) else 0.0


def _values(x):
    return x.elevation if isinstance(x, ElevationTrace) else np.asarray(x, dtype=float)


def resample(trace: ElevationTrace, target_rate, window=None) -> ElevationTrace:
    """Linear interpolation onto ``t0 + k / target_rate`` for ``t0 <= t <= t1``.

    ``window`` defaults to the trace span.

    Raises
    ------
    RangeError
        If the window reaches outside the trace span.
    """
    lo, hi = trace.span
    t0, t1 = (lo, hi) if window is None else (float(window[0]), float(window[1]))
    eps = 1e-9 * max(1.0, abs(lo), abs(hi))
    if t0 < lo - eps or t1 > hi + eps or t1 < t0:
        raise RangeError(f"window [{t0}, {t1}] is outside the trace span [{lo}, {hi}]")
    n = int(math.floor((t1 - t0) * target_rate + 1e-6)) + 1
    grid = t0 + np.arange(n) / target_rate
    return ElevationTrace(grid, np.interp(grid, trace.t, trace.elevation), float(target_rate))


def align(est: ElevationTrace, ref: ElevationTrace, rate=None):
    """Resample both traces onto a shared grid over their common window.

    The grid runs at ``rate`` or, by default, the lower of the two nominal
    rates. Returns ``(est, ref)`` on that grid.
    """
    t0 = max(est.t[0], ref.t[0])
    t1 = min(est.t[-1], ref.t[-1])
    if not t1 > t0:
        raise RangeError(
            f"traces do not overlap: estimate {est.span}, reference {ref.span}"
        )
    rate = min(est.rate, ref.rate) if rate is None else rate
    return resample(est, rate, (t0, t1)), resample(ref, rate, (t0, t1))


def _check_pair(est, ref):
    e, r = _values(est), _values(ref)
    if e.shape != r.shape:
        raise ShapeError(f"length mismatch: {e.shape} vs {r.shape}")
    if e.size == 0:
        raise ShapeError("empty traces")
    return e, r


def rmse(est, ref):
    """Root-mean-square difference of two aligned traces."""
    e, r = _check_pair(est, ref)
    d = e - r
    return float(np.sqrt(np.mean(d * d)))


def avg_abs_error(est, ref):
    """Mean absolute difference of two aligned traces."""
    e, r = _check_pair(est, ref)
    return float(np.mean(np.abs(e - r)))


def _pearson(x, y):
    # exact test first; mean removal leaves rounding residue on constants
    if x.size == 0 or x.min() == x.max() or y.min() == y.max():
        return None
    x = x - x.mean()
    y = y - y.mean()
    sxx = float(np.dot(x, x))
    syy = float(np.dot(y, y))
    if sxx == 0.0 or syy == 0.0:
        return None
    return float(np.dot(x, y)) / math.sqrt(sxx * syy)


def cross_correlation(est, ref, max_lag=DEFAULT_MAX_LAG, rate=None):
    """Peak normalized cross-correlation over integer lags.

    For a lag of ``k`` samples, ``est[i + k]`` is paired with ``ref[i]`` over the
    overlap and the Pearson coefficient of the mean-removed overlap is taken.
    A positive lag therefore means the estimate trails the reference.

    Parameters
    ----------
    est, ref : ElevationTrace or array
        Traces on the same uniform grid.
    max_lag : float
        Search half-width in seconds; 0 gives the zero-lag Pearson r.
    rate : float, optional
        Grid rate; taken from ``ref`` when it is a trace.

    Returns
    -------
    (r, lag) : tuple
        Peak coefficient and its lag in seconds, or ``(None, None)`` when the
        correlation is undefined because a signal is constant.
    """
    e, r = _check_pair(est, ref)
    if rate is None:
        rate = ref.rate if isinstance(ref, ElevationTrace) else 1.0
    n = len(e)
    kmax = min(int(round(max_lag * rate)), n - 2)
    best, best_k = None, None
    for k in range(-kmax, kmax + 1):
        if k >= 0:
            c = _pearson(e[k:], r[: n - k])
        else:
            c = _pearson(e[: n + k], r[-k:])
        if c is None:
            continue
        # ties go to the lag of smallest magnitude
        if best is None or c > best or (c == best and abs(k) < abs(best_k)):
            best, best_k = c, k
    if best is None:
        return None, None
    return best, best_k / rate


@dataclass(frozen=True)
class ReportConfig:
    max_lag: float = DEFAULT_MAX_LAG
    quasi_static_p2p: float = QUASI_STATIC_P2P
    lag_compensated: bool = False
    rate: Optional[float] = None


@dataclass
class TaskEntry:
    """One row of a validation report (angles in radians, lag in seconds).

    ``r`` and ``lag`` are None for quasi-static references.
    """

    task: int
    r: Optional[float]
    lag: Optional[float]
    rmse: float
    avg_abs_err: float
    n: int
    ref_peak_to_peak: float
    rate: float
    label: str = ""


@dataclass
class ValidationReport:
    entries: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def entry(self, task):
        for e in self.entries:
            if e.task == task:
                return e
        raise KeyError(task)

    def to_dict(self):
        return {"meta": self.meta, "entries": [asdict(e) for e in self.entries]}

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def to_table(self):
        """Plain-text table in degrees with the columns task, r, RMSE, average abs. error."""
        head = f"{'Task':<44} {'r':>7} {'lag(s)':>7} {'RMSE(deg)':>10} {'AvgAbs(deg)':>12} {'n':>6}"
        lines = [head, "-" * len(head)]
        for e in self.entries:
            name = f"{e.task}- {e.label}" if e.label else str(e.task)
            r = "NA" if e.r is None else f"{e.r:.3f}"
            lag = "NA" if e.lag is None else f"{e.lag:+.3f}"
            lines.append(
                f"{name:<44} {r:>7} {lag:>7} {math.degrees(e.rmse):>10.2f} "
                f"{math.degrees(e.avg_abs_err):>12.2f} {e.n:>6}"
            )
        return "\n".join(lines) + "\n"


def evaluate_pair(task, est, ref, config=None, label=""):
    """Statistics for one task after aligning ``est`` onto the reference grid."""
    config = ReportConfig() if config is None else config
    e, r = align(est, ref, config.rate)
    p2p = r.peak_to_peak()
    corr, lag = None, None
    if p2p >= config.quasi_static_p2p:
        corr, lag = cross_correlation(e, r, config.max_lag, r.rate)
    ev, rv = e.elevation, r.elevation
    if config.lag_compensated and lag:
        k = int(round(lag * r.rate))
        ev, rv = (ev[k:], rv[: len(rv) - k]) if k > 0 else (ev[: len(ev) + k], rv[-k:])
    return TaskEntry(
        task=task,
        r=corr,
        lag=lag,
        rmse=rmse(ev, rv),
        avg_abs_err=avg_abs_error(ev, rv),
        n=len(ev),
        ref_peak_to_peak=p2p,
        rate=r.rate,
        label=label,
    )


def build_report(pairs, config=None, labels=None, meta=None) -> ValidationReport:
    """Assemble a report from ``{task: (estimate, reference)}``.

    Correlation is suppressed (``r = None``) when the reference peak-to-peak
    is below ``config.quasi_static_p2p``; errors are always reported.
    """
    labels = labels or {}
    entries = [
        evaluate_pair(task, est, ref, config, labels.get(task, ""))
        for task, (est, ref) in sorted(pairs.items())
    ]
    return ValidationReport(entries, dict(meta or {}))


def mean_sd(values):
    """Mean and sample standard deviation, ignoring None; (None, None) if empty."""
    v = [x for x in values if x is not None]
    if not v:
        return None, None
    a = np.asarray(v, dtype=float)
    sd = float(a.std(ddof=1)) if len(a) > 1 else 0.0
    return float(a.mean()), sd
