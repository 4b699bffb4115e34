"""Command-line interface: ``simulate``, ``fuse``, ``validate`` and ``sweep``.

Options may also come from a flat ``key = value`` config file, given with
``--config`` or through the ``ARMFUSION_CONFIG`` environment variable. Flags
on the command line win over the file, which wins over built-in defaults.

Exit codes: 0 success, 2 usage or configuration, 3 file I/O, 4 calibration,
5 malformed or inconsistent data.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import csvio, experiments, fusion, simulator
from .errors import (
    CalibrationError,
    ConfigurationError,
    CsvFormatError,
    InvalidGravityError,
    RangeError,
    ShapeError,
    StreamError,
)
from .metrics import ElevationTrace, ReportConfig, build_report

CONFIG_ENV = "ARMFUSION_CONFIG"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_CALIBRATION = 4
EXIT_DATA = 5

log = logging.getLogger("armfusion")

# config-file keys and how to parse them
_CONFIG_KEYS = {
    "rate": float,
    "duration": float,
    "seed": int,
    "ideal": lambda s: _parse_bool(s),
    "lever_arm": float,
    "units": str,
    "alpha": float,
    "calib_window": float,
    "max_lag": float,
    "lag_compensated": lambda s: _parse_bool(s),
    "seeds": int,
    "base_seed": int,
    "rates": lambda s: _parse_floats(s),
    "tasks": lambda s: [int(x) for x in _parse_floats(s)],
    "jobs": int,
}


def _parse_bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_floats(s):
    return [float(x) for x in s.replace(",", " ").split()]


def load_config(path):
    """Parse a flat ``key = value`` file; ``#`` starts a comment.

    Keys may use ``-`` or ``_``. Unknown keys and unparsable values raise
    :class:`ConfigurationError`.
    """
    out = {}
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{line_no}: expected 'key = value'")
            key, value = (p.strip() for p in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _CONFIG_KEYS:
                raise ConfigurationError(f"{path}:{line_no}: unknown key {key!r}")
            try:
                out[key] = _CONFIG_KEYS[key](value)
            except ValueError as exc:
                raise ConfigurationError(f"{path}:{line_no}: bad value for {key}: {exc}") from None
    return out


@dataclass
class RunConfig:
    """Resolved settings for one command."""

    fusion: Optional[fusion.FusionConfig] = None
    noise: Optional[simulator.NoiseModel] = None
    profile: Optional[simulator.MotionProfile] = None
    paths: dict = field(default_factory=dict)
    units: str = "deg"

    def validate(self):
        if self.units not in ("deg", "rad"):
            raise ConfigurationError(f"units must be 'deg' or 'rad', got {self.units!r}")
        real = {k: Path(v).resolve() for k, v in self.paths.items() if v not in (None, "-")}
        seen = {}
        for k, p in real.items():
            if p in seen:
                raise ConfigurationError(f"--{seen[p]} and --{k} point to the same file {p}")
            seen[p] = k
        return self


class _Resolver:
    """Look up an option: command-line flag, then config file, then default."""

    def __init__(self, args, config):
        self.args = args
        self.config = config

    def __call__(self, name, default=None):
        v = getattr(self.args, name, None)
        if v is not None:
            return v
        return self.config.get(name, default)


def _infer_rate(t, what):
    if len(t) < 2:
        raise CsvFormatError(f"{what} needs at least two rows to infer its sampling rate")
    dt = float(np.median(np.diff(t)))
    if not dt > 0:
        raise StreamError(f"{what} timestamps are not increasing")
    # timestamps carry 9 significant digits, so the rate cannot be trusted beyond that
    return float(f"{1.0 / dt:.9g}")


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


# --- commands -------------------------------------------------------------

def cmd_simulate(args, opt):
    task = args.task
    rate = opt("rate", 100.0)
    ideal = bool(opt("ideal", False))
    overrides = {}
    if opt("duration") is not None:
        overrides["duration"] = opt("duration")
    lever = opt("lever_arm")
    if lever is not None:
        overrides["lever_arm"] = lever
    elif ideal:
        overrides["lever_arm"] = 0.0
    noise = simulator.NoiseModel.ideal() if ideal else simulator.NoiseModel(seed=opt("seed", 0))
    if args.late_bias is not None:
        if len(args.late_bias) != 3:
            raise ConfigurationError(f"--late-bias needs three values, got {len(args.late_bias)}")
        noise = replace(noise, late_gyro_bias=tuple(math.radians(v) for v in args.late_bias))
    rc = RunConfig(
        noise=noise,
        profile=simulator.task_profile(task, **overrides),
        paths={"imu": args.imu, "truth": args.truth},
        units=opt("units", "deg"),
    ).validate()
    truth = simulator.trajectory(rc.profile, rate)
    rec = simulator.synthesize_imu(truth, rc.noise)
    csvio.write_imu(args.imu, rec.t, rec.acc, rec.gyr)
    csvio.write_elevation(args.truth, truth.t, truth.elevation, rc.units)
    log.info("task %d: wrote %d IMU rows to %s and %d truth rows to %s",
             task, len(rec), args.imu, len(truth), args.truth)
    return EXIT_OK


def cmd_fuse(args, opt):
    rc = RunConfig(paths={"input": args.input, "out": args.out}, units=opt("units", "deg")).validate()
    samples = csvio.imu_samples(args.input)
    t = np.array([s.t for s in samples])
    rate = opt("rate") or (_infer_rate(t, args.input) if len(t) >= 2 else 100.0)
    cfg = fusion.FusionConfig.default(rate)
    alpha = opt("alpha")
    if alpha is not None:
        cfg = cfg.with_alpha(alpha)
    rc.fusion = cfg
    window = opt("calib_window", fusion.DEFAULT_MIN_DURATION)
    calib_window, stream = fusion.split_calibration(samples, window) if len(samples) >= 2 else (samples, [])
    out = fusion.run(cfg, calib_window, stream, min_duration=window)
    te, el = fusion.elevations(out)
    csvio.write_elevation(args.out, te, el, rc.units)
    log.info("fused %d samples from %s into %s", len(out), args.input, args.out)
    return EXIT_OK


def _trace(path):
    t, e = csvio.read_elevation(path)
    return ElevationTrace(t, e, _infer_rate(t, path))


def cmd_validate(args, opt):
    RunConfig(paths={"estimate": args.estimate, "reference": args.reference,
                     "json": args.json, "table": args.table, "svg": args.svg}).validate()
    est, ref = _trace(args.estimate), _trace(args.reference)
    report_cfg = ReportConfig(
        max_lag=opt("max_lag", ReportConfig.max_lag),
        lag_compensated=bool(opt("lag_compensated", False)),
    )
    label = simulator.TASK_NAMES.get(args.task, "") if args.task else ""
    report = build_report(
        {args.task or 0: (est, ref)},
        report_cfg,
        labels={args.task or 0: label},
        meta={"estimate": str(args.estimate), "reference": str(args.reference),
              "max_lag_s": report_cfg.max_lag, "lag_compensated": report_cfg.lag_compensated},
    )
    if args.json:
        _emit(report.to_json() + "\n", args.json)
    _emit(report.to_table(), args.table)
    if args.svg:
        plot_svg(est, ref, args.svg, title=label or None)
    return EXIT_OK


def plot_svg(est, ref, path, title=None):
    """Line chart of estimate against reference, in degrees."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise ConfigurationError("--svg needs matplotlib (pip install 'artifact[plot]')") from exc
    fig, ax = plt.subplots(figsize=(8, 3))
    ax.plot(ref.t, np.degrees(ref.elevation), label="reference", lw=1.2)
    ax.plot(est.t, np.degrees(est.elevation), label="estimate", lw=1.0, ls="--")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("elevation (deg)")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_sweep(args, opt):
    RunConfig(paths={"json": args.json, "table": args.table}).validate()
    n_seeds = opt("seeds", 5)
    if n_seeds < 1:
        raise ConfigurationError(f"--seeds must be at least 1, got {n_seeds}")
    tasks = opt("tasks", list(simulator.TASK_IDS))
    bad = [t for t in tasks if t not in simulator.TASK_IDS]
    if bad:
        raise ConfigurationError(f"unknown task ids {bad}; expected 1..10")
    result = experiments.sweep(
        tasks=tasks,
        rates=opt("rates", list(experiments.DEFAULT_RATES)),
        n_seeds=n_seeds,
        base_seed=opt("base_seed", 0),
        ideal=bool(opt("ideal", False)),
        slerp_alpha=opt("alpha"),
        report=ReportConfig(max_lag=opt("max_lag", ReportConfig.max_lag)),
        jobs=opt("jobs", 1),
    )
    if args.json:
        _emit(result.to_json(), args.json)
    _emit(result.to_table(), args.table)
    return EXIT_OK


# --- parser ---------------------------------------------------------------

def _csv_floats(s):
    try:
        return _parse_floats(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _csv_ints(s):
    return [int(x) for x in _csv_floats(s)]


def build_parser():
    p = argparse.ArgumentParser(prog="armfusion", description=__doc__.split("\n")[0])
    p.add_argument("--config", help=f"key = value options file (default: ${CONFIG_ENV})")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="write a synthetic task as IMU and truth CSV files")
    s.add_argument("--task", type=int, required=True, choices=simulator.TASK_IDS, metavar="{1..10}")
    s.add_argument("--rate", type=float, help="sampling rate in Hz (default 100)")
    s.add_argument("--duration", type=float, help="task duration in s (default per task)")
    s.add_argument("--seed", type=int, help="noise seed (default 0)")
    s.add_argument("--ideal", action="store_true", default=None,
                   help="no noise or bias, sensor on the rotation centre")
    s.add_argument("--lever-arm", dest="lever_arm", type=float, help="sensor distance from the shoulder, m")
    s.add_argument("--late-bias", dest="late_bias", type=_csv_floats, metavar="X,Y,Z",
                   help="gyro bias in deg/s that starts after the still prelude")
    s.add_argument("--units", choices=("deg", "rad"))
    s.add_argument("--imu", default="imu.csv", help="IMU output (default imu.csv)")
    s.add_argument("--truth", default="truth.csv", help="truth output (default truth.csv)")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fuse", help="estimate elevation from an IMU CSV file")
    f.add_argument("input", help="IMU CSV with a still window at the start")
    f.add_argument("--out", default="elevation.csv", help="output CSV (default elevation.csv)")
    f.add_argument("--calib-window", dest="calib_window", type=float,
                   help="length of the leading still window in s (default 2.0)")
    f.add_argument("--alpha", type=float, help="accelerometer Slerp weight per step at 100 Hz")
    f.add_argument("--rate", type=float, help="override the rate inferred from timestamps")
    f.add_argument("--units", choices=("deg", "rad"))
    f.set_defaults(func=cmd_fuse)

    v = sub.add_parser("validate", help="compare an estimate with a reference trace")
    v.add_argument("estimate")
    v.add_argument("reference")
    v.add_argument("--task", type=int, choices=simulator.TASK_IDS, metavar="{1..10}",
                   help="task id used to label the report")
    v.add_argument("--json", default="report.json", help="JSON report path (default report.json)")
    v.add_argument("--table", default="-", help="table path, '-' for stdout")
    v.add_argument("--svg", help="also write an estimate-vs-reference SVG chart")
    v.add_argument("--max-lag", dest="max_lag", type=float, help="cross-correlation search, s")
    v.add_argument("--lag-compensated", dest="lag_compensated", action="store_true", default=None,
                   help="shift by the correlation lag before computing errors")
    v.set_defaults(func=cmd_validate)

    w = sub.add_parser("sweep", help="simulate, fuse and score every task at both rates")
    w.add_argument("--seeds", type=int, help="number of seeds per task and rate (default 5)")
    w.add_argument("--base-seed", dest="base_seed", type=int, help="first seed (default 0)")
    w.add_argument("--rates", type=_csv_floats, help="comma-separated rates (default 100,500)")
    w.add_argument("--tasks", type=_csv_ints, help="comma-separated task ids (default all)")
    w.add_argument("--ideal", action="store_true", default=None)
    w.add_argument("--alpha", type=float)
    w.add_argument("--max-lag", dest="max_lag", type=float)
    w.add_argument("--jobs", type=int, help="worker processes (default 1)")
    w.add_argument("--json", help="also write the JSON summary here")
    w.add_argument("--table", default="-", help="table path, '-' for stdout")
    w.set_defaults(func=cmd_sweep)
    return p


def _exit_code(exc):
    if isinstance(exc, CalibrationError):
        return EXIT_CALIBRATION
    if isinstance(exc, ConfigurationError):
        return EXIT_USAGE
    if isinstance(exc, (CsvFormatError, StreamError, RangeError, ShapeError, InvalidGravityError)):
        return EXIT_DATA
    if isinstance(exc, OSError):
        return EXIT_IO
    return None


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config_path = args.config or os.environ.get(CONFIG_ENV)
        config = load_config(config_path) if config_path else {}
        return args.func(args, _Resolver(args, config))
    except Exception as exc:  # map known failures to exit codes, re-raise the rest
        code = _exit_code(exc)
        if code is None:
            raise
        print(f"armfusion {args.command}: error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
