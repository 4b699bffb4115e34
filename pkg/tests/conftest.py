import logging
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile(
    "repo", deadline=None, max_examples=200, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")

G = 9.80665


@pytest.fixture(autouse=True)
def _quiet_clamp_warning():
    # 100 Hz streams clamp the 50 Hz corner; the warning is tested on its own
    logging.getLogger("armfusion.filters").setLevel(logging.ERROR)
    yield
    logging.getLogger("armfusion.filters").setLevel(logging.NOTSET)


def quat_from_components(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


# unit quaternions drawn uniformly enough: normalize a 4-vector bounded away from 0
unit_quats = st.lists(
    st.floats(-1.0, 1.0, allow_nan=False), min_size=4, max_size=4
).filter(lambda v: sum(c * c for c in v) > 1e-3).map(quat_from_components)

angles = st.floats(-math.pi, math.pi, allow_nan=False)


def random_quats(n, seed):
    rng = np.random.default_rng(seed)
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def rotation_of(q):
    """Independent quaternion -> matrix via the sandwich product on basis vectors."""
    w, x, y, z = q / np.linalg.norm(q)

    def mul(a, b):
        aw, ax, ay, az = a
        bw, bx, by, bz = b
        return (
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        )

    cols = []
    for e in np.eye(3):
        r = mul(mul((w, x, y, z), (0.0, *e)), (w, -x, -y, -z))
        cols.append(r[1:])
    return np.array(cols).T


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.verdict_lines():
        terminalreporter.write_line(line)
