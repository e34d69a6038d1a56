import json

import numpy as np
import pytest

from mrcov import cli, csvio
from mrcov.timegrid import TickSchedule


@pytest.fixture
def ticks(tmp_path):
    out, truth, grid = tmp_path / "ticks.csv", tmp_path / "truth.json", tmp_path / "grid.csv"
    code = cli.main(["simulate", "--out", str(out), "--truth", str(truth), "--grid", str(grid),
                     "--sigma", "1", "--noise", "0.01", "--n", "4000", "--seed", "3", "--jumps", "0.5:1.0"])
    assert code == 0
    return out, truth, grid


def test_simulate_writes_files(ticks):
    out, truth, grid = ticks
    sched = csvio.read_ticks(out)
    assert len(sched) == 1 and len(sched[0]) == 4001 and sched[0].values is not None
    assert json.loads(truth.read_text())["jump_sum"] == 1.0
    sync = csvio.read_grid(grid)
    np.testing.assert_array_equal(sync.grid, sched[0].times)


def test_estimate_with_truth(ticks, tmp_path):
    out, truth, _ = ticks
    res = tmp_path / "est.json"
    assert cli.main(["estimate", str(out), "--theta", "0.1", "--truth", str(truth), "--out", str(res)]) == 0
    rep = json.loads(res.read_text())
    assert rep["N_T"] == 4000 and rep["k_n"] == 6 and rep["z"] is not None
    fast = tmp_path / "fast.json"
    assert cli.main(["estimate", str(out), "--theta", "0.1", "--fast", "--out", str(fast)]) == 0
    assert json.loads(fast.read_text())["estimate"][0][0] == pytest.approx(rep["estimate"][0][0], rel=1e-10)


def test_decompose(ticks, tmp_path):
    out, _, _ = ticks
    res = tmp_path / "dec.json"
    assert cli.main(["decompose", str(out), "--theta", "0.1", "--sigma", "1", "--noise", "0.01",
                     "--out", str(res)]) == 0
    dec = json.loads(res.read_text())
    assert dec["jv"] == pytest.approx(1.0, abs=0.3) and dec["exceed"] > 0
    assert cli.main(["decompose", str(out), "--theta", "0.1"]) == 1


def test_param_jump(tmp_path):
    res = tmp_path / "pj.json"
    assert cli.main(["param-jump", "--n", "500", "--reps", "50", "--S", "0.3,0.6", "--gamma", "1,2",
                     "--out", str(res)]) == 0
    out = json.loads(res.read_text())
    assert out["fisher_direct_max_abs_diff"] < 1e-10 and out["var_limit"] == 2.0


def test_montecarlo_and_report(tmp_path, capsys):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("sigma = 1\nnoise = 0.01\ntheta = oracle\nn = 500, 1000\nreps = 8\nseed = 1\n")
    assert cli.main(["montecarlo", str(cfg), "--output", str(tmp_path / "mc"), "--plots"]) == 0
    summary = tmp_path / "mc" / "summary.json"
    assert summary.exists() and (tmp_path / "mc" / "qq_n500_11.csv").exists()
    capsys.readouterr()
    assert cli.main(["report", str(summary), "--plots"]) == 0
    text = capsys.readouterr().out
    assert "rmse" in text and "log-log RMSE slope [11]" in text


def test_weights_table(capsys):
    assert cli.main(["weights", "tent", "--points", "3"]) == 0
    text = capsys.readouterr().out
    assert "psi2 = 0.0833333333333" in text and text.count("\n") == 1 + 5 + 1 + 3


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("sigma = 1\nreps = -1\n")
    assert cli.main(["montecarlo", str(bad)]) == 2
    assert cli.main(["estimate", str(tmp_path / "missing.csv"), "--theta", "0.1"]) == 1


def test_tick_csv_round_trip(tmp_path):
    a = TickSchedule(0, [0.0, 0.5, 1.0], [1.0, 2.0, 3.0])
    b = TickSchedule(1, [0.1, 0.7])
    path = tmp_path / "t.csv"
    csvio.write_ticks(path, [a, b])
    ra, rb = csvio.read_ticks(path)
    np.testing.assert_array_equal(ra.values, a.values)
    assert rb.values is None and np.array_equal(rb.times, b.times)
