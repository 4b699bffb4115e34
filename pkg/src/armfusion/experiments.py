"""Simulate, fuse and score tasks; aggregate repeated runs into a summary table.

A *trial* is one (task, rate, seed) combination. Trials are independent, so a
sweep may fan them out over worker processes; the summary is always assembled
in sorted trial order, which keeps the output byte-stable.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import fusion, simulator
from .metrics import ElevationTrace, ReportConfig, TaskEntry, evaluate_pair, mean_sd
from .simulator import FAST_TASKS, SLOW_TASKS, TASK_IDS, TASK_NAMES, NoiseModel

DEFAULT_RATES = (100.0, 500.0)


@dataclass(frozen=True)
class TrialSpec:
    """One simulated run.

    ``ideal`` removes sensor noise and bias and places the sensor on the
    rotation centre, so the specific force is gravity alone.
    """

    task: int
    rate: float
    seed: int = 0
    ideal: bool = False
    slerp_alpha: Optional[float] = None
    duration: Optional[float] = None

    def noise(self):
        return NoiseModel.ideal() if self.ideal else NoiseModel(seed=self.seed)

    def overrides(self):
        out = {}
        if self.ideal:
            out["lever_arm"] = 0.0
        if self.duration is not None:
            out["duration"] = self.duration
        return out

    def config(self):
        cfg = fusion.FusionConfig.default(self.rate)
        return cfg if self.slerp_alpha is None else cfg.with_alpha(self.slerp_alpha)


def run_trial(spec: TrialSpec):
    """Fused estimate and ground truth of a trial as ``(estimate, reference)`` traces.

    The estimate keeps only samples from the task onset (``t >= 0``) on, the
    span covered by the reference.
    """
    truth, rec = simulator.simulate(spec.task, spec.rate, spec.noise(), **spec.overrides())
    out = fusion.run(spec.config(), rec.calibration_window(), rec.stream())
    t, elev = fusion.elevations(out)
    keep = t >= -1e-9
    est = ElevationTrace(t[keep], elev[keep], spec.rate)
    ref = ElevationTrace(truth.t, truth.elevation, spec.rate)
    return est, ref


def score_trial(spec: TrialSpec, report=None) -> TaskEntry:
    est, ref = run_trial(spec)
    return evaluate_pair(spec.task, est, ref, report, TASK_NAMES[spec.task])


@dataclass
class SweepResult:
    """Per-trial entries of a sweep, keyed by ``(task, rate, seed)``."""

    tasks: tuple
    rates: tuple
    seeds: tuple
    entries: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def runs(self, task, rate):
        return [self.entries[(task, rate, s)] for s in self.seeds]

    def summary(self, task, rate):
        """``{stat: (mean, sd)}`` over seeds; angles in degrees."""
        runs = self.runs(task, rate)
        deg = [math.degrees(e.rmse) for e in runs], [math.degrees(e.avg_abs_err) for e in runs]
        return {
            "r": mean_sd([e.r for e in runs]),
            "rmse": mean_sd(deg[0]),
            "avg_abs_err": mean_sd(deg[1]),
        }

    def group_mean_rmse(self, tasks, rate):
        """Mean RMSE in degrees over all seeds of ``tasks`` at ``rate``."""
        vals = [math.degrees(e.rmse) for t in tasks if t in self.tasks for e in self.runs(t, rate)]
        return float(np.mean(vals)) if vals else None

    def to_dict(self):
        rows = []
        for task in self.tasks:
            row = {"task": task, "name": TASK_NAMES[task], "rates": {}}
            for rate in self.rates:
                stats = self.summary(task, rate)
                row["rates"][_rate_key(rate)] = {
                    k: {"mean": m, "sd": s} for k, (m, s) in stats.items()
                }
            rows.append(row)
        groups = {
            _rate_key(rate): {
                "slow_mean_rmse_deg": self.group_mean_rmse(SLOW_TASKS, rate),
                "fast_mean_rmse_deg": self.group_mean_rmse(FAST_TASKS, rate),
            }
            for rate in self.rates
        }
        trials = [
            dict(asdict(self.entries[k]), seed=k[2]) for k in sorted(self.entries)
        ]
        return {
            "meta": self.meta,
            "tasks": rows,
            "groups": groups,
            "trials": trials,
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True) + "\n"

    def to_table(self):
        """Mean[SD] of r, RMSE and average absolute error (degrees) per task and rate."""
        cols = []
        for rate in self.rates:
            tag = f"{rate:g}Hz"
            cols += [f"r@{tag}", f"RMSE@{tag}", f"AvgAbs@{tag}"]
        head = f"{'Task':<44}" + "".join(f"{c:>16}" for c in cols)
        lines = [head, "-" * len(head)]
        for task in self.tasks:
            cells = []
            for rate in self.rates:
                s = self.summary(task, rate)
                cells += [_fmt(*s["r"], 3), _fmt(*s["rmse"], 2), _fmt(*s["avg_abs_err"], 2)]
            lines.append(f"{str(task) + '- ' + TASK_NAMES[task]:<44}" + "".join(f"{c:>16}" for c in cells))
        lines.append("")
        for rate in self.rates:
            slow = self.group_mean_rmse(SLOW_TASKS, rate)
            fast = self.group_mean_rmse(FAST_TASKS, rate)
            lines.append(
                f"mean RMSE @{rate:g}Hz: slow tasks {_fmt(slow, None, 2)} deg, "
                f"fast tasks {_fmt(fast, None, 2)} deg"
            )
        return "\n".join(lines) + "\n"


def _rate_key(rate):
    return f"{rate:g}"


def _fmt(mean, sd, digits):
    if mean is None:
        return "NA"
    if sd is None:
        return f"{mean:.{digits}f}"
    return f"{mean:.{digits}f}[{sd:.{digits}f}]"


def _score(args):
    spec, report = args
    return score_trial(spec, report)


def sweep(tasks=TASK_IDS, rates=DEFAULT_RATES, n_seeds=5, base_seed=0, ideal=False,
          slerp_alpha=None, report=None, jobs=1) -> SweepResult:
    """Score every (task, rate, seed) trial.

    Seeds are ``base_seed, base_seed + 1, ...``. With ``jobs > 1`` trials run in
    a process pool; results are identical to a serial run.
    """
    tasks = tuple(sorted(tasks))
    rates = tuple(float(r) for r in rates)
    seeds = tuple(range(base_seed, base_seed + n_seeds))
    keys = [(t, r, s) for t in tasks for r in rates for s in seeds]
    work = [(TrialSpec(t, r, s, ideal, slerp_alpha), report) for t, r, s in keys]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            scored = list(pool.map(_score, work))
    else:
        scored = [_score(w) for w in work]
    meta = {
        "seeds": list(seeds),
        "rates_hz": list(rates),
        "ideal": ideal,
        "slerp_alpha": fusion.DEFAULT_SLERP_ALPHA if slerp_alpha is None else slerp_alpha,
    }
    return SweepResult(tasks, rates, seeds, dict(zip(keys, scored)), meta)
