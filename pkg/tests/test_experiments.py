import json
import math

import numpy as np
import pytest

from armfusion import experiments as ex
from armfusion.metrics import ReportConfig
from armfusion.simulator import NoiseModel


def test_trial_spec_ideal_removes_noise_and_lever():
    spec = ex.TrialSpec(1, 100.0, seed=3, ideal=True)
    assert spec.noise() == NoiseModel.ideal()
    assert spec.overrides() == {"lever_arm": 0.0}
    noisy = ex.TrialSpec(1, 100.0, seed=3, duration=5.0)
    assert noisy.noise().seed == 3
    assert noisy.overrides() == {"duration": 5.0}


def test_trial_spec_alpha_override():
    assert ex.TrialSpec(1, 100.0, slerp_alpha=0.0).config().slerp_alpha == 0.0


def test_run_trial_estimate_covers_the_reference():
    est, ref = ex.run_trial(ex.TrialSpec(1, 100.0, ideal=True, duration=5.0))
    assert est.t[0] >= -1e-9
    assert len(est) == len(ref)
    np.testing.assert_allclose(est.t, ref.t, atol=1e-9)


def test_score_trial_is_labelled():
    e = ex.score_trial(ex.TrialSpec(2, 100.0, ideal=True, duration=5.0))
    assert e.task == 2 and e.r is None
    assert "rotation" in e.label.lower()


@pytest.fixture(scope="module")
def small_sweep():
    return ex.sweep(tasks=(2, 1), rates=(100.0,), n_seeds=2, base_seed=4)


def test_sweep_structure(small_sweep):
    s = small_sweep
    assert s.tasks == (1, 2) and s.seeds == (4, 5)
    assert set(s.entries) == {(t, 100.0, k) for t in (1, 2) for k in (4, 5)}
    stats = s.summary(1, 100.0)
    runs = [math.degrees(e.rmse) for e in s.runs(1, 100.0)]
    assert stats["rmse"][0] == pytest.approx(np.mean(runs))
    assert stats["rmse"][1] == pytest.approx(np.std(runs, ddof=1))
    assert s.summary(2, 100.0)["r"] == (None, None)


def test_sweep_json_and_table(small_sweep):
    d = json.loads(small_sweep.to_json())
    assert [row["task"] for row in d["tasks"]] == [1, 2]
    assert len(d["trials"]) == 4
    assert d["meta"]["seeds"] == [4, 5]
    assert d["tasks"][1]["rates"]["100"]["r"] == {"mean": None, "sd": None}
    table = small_sweep.to_table()
    assert "RMSE@100Hz" in table and "NA" in table
    assert "mean RMSE @100Hz" in table


def test_group_mean_ignores_missing_tasks(small_sweep):
    only_slow = small_sweep.group_mean_rmse((1, 2, 7), 100.0)
    vals = [math.degrees(e.rmse) for t in (1, 2) for e in small_sweep.runs(t, 100.0)]
    assert only_slow == pytest.approx(np.mean(vals))
    assert small_sweep.group_mean_rmse((3, 6), 100.0) is None


def test_parallel_sweep_matches_serial():
    kw = dict(tasks=(1,), rates=(100.0,), n_seeds=2, report=ReportConfig())
    serial = ex.sweep(jobs=1, **kw)
    parallel = ex.sweep(jobs=2, **kw)
    assert serial.to_json() == parallel.to_json()
