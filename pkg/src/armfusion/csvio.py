"""Reading and writing the IMU and elevation CSV files.

IMU files have the header ``t,ax,ay,az,gx,gy,gz`` (s, m/s^2, rad/s). Elevation
files have ``t,elevation_deg`` or ``t,elevation_rad``. Numbers are written with
9 significant digits.
"""
from __future__ import annotations

import csv
import math

import numpy as np

from .calibration import SensorSample
from .errors import CsvFormatError

IMU_HEADER = ("t", "ax", "ay", "az", "gx", "gy", "gz")
ELEVATION_HEADERS = {"deg": ("t", "elevation_deg"), "rad": ("t", "elevation_rad")}
FLOAT_FORMAT = "%.9g"


def _fmt(x):
    return FLOAT_FORMAT % x


def _write_rows(path, header, columns):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _read_rows(path, expected):
    """Rows of floats; the header must equal one of ``expected``.

    Returns ``(header, array)``; line numbers in errors are 1-based and count
    the header line.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(c.strip() for c in next(reader))
        except StopIteration:
            raise CsvFormatError("file is empty, expected a header line", path, 1) from None
        if header not in expected:
            want = " or ".join(",".join(h) for h in expected)
            raise CsvFormatError(f"unexpected header {','.join(header)!r}, expected {want}", path, 1)
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise CsvFormatError(
                    f"expected {len(header)} fields, found {len(row)}", path, line_no
                )
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise CsvFormatError(f"non-numeric field in {row!r}", path, line_no) from None
            if not all(math.isfinite(v) for v in vals):
                raise CsvFormatError(f"non-finite value in {row!r}", path, line_no)
            rows.append(vals)
    arr = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return header, arr


def write_imu(path, t, acc, gyr):
    acc, gyr = np.asarray(acc), np.asarray(gyr)
    _write_rows(path, IMU_HEADER, [t, *acc.T, *gyr.T])


def read_imu(path):
    """Arrays ``(t, acc, gyr)`` from an IMU CSV file."""
    _, arr = _read_rows(path, (IMU_HEADER,))
    return arr[:, 0], arr[:, 1:4], arr[:, 4:7]


def imu_samples(path):
    t, acc, gyr = read_imu(path)
    return [SensorSample(t[i], acc[i], gyr[i]) for i in range(len(t))]


def write_elevation(path, t, elevation_rad, units="deg"):
    """Write an elevation trace given in radians, converting to ``units``."""
    if units not in ELEVATION_HEADERS:
        raise ValueError(f"units must be 'deg' or 'rad', got {units!r}")
    vals = np.degrees(elevation_rad) if units == "deg" else np.asarray(elevation_rad)
    _write_rows(path, ELEVATION_HEADERS[units], [t, vals])


def read_elevation(path):
    """Arrays ``(t, elevation)`` with elevation in radians whatever the file units."""
    header, arr = _read_rows(path, tuple(ELEVATION_HEADERS.values()))
    elev = arr[:, 1]
    if header == ELEVATION_HEADERS["deg"]:
        elev = np.radians(elev)
    return arr[:, 0], elev
