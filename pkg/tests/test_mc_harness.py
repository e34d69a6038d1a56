import json
import math

import numpy as np
import pytest

from mrcov import estimators as E
from mrcov import mc_harness as H
from mrcov.errors import ConfigError
from mrcov.market_sim import replication_rng
from mrcov.timegrid import synchronize

BASE = "sigma = 1\nnoise = 0.01\nestimator = mrc\nweight = doubleexp\ntheta = 0.2\nn = 2000\nreps = 12\nseed = 5\n"


def cfg_for(tmp_path, extra="", base=BASE):
    """Base scenario with the ``key = value`` lines of ``extra`` overriding it."""
    keys = dict(line.split(" = ", 1) for line in (base + extra).splitlines() if line.strip())
    keys["output"] = str(tmp_path)
    return H.parse_config("\n".join(f"{k} = {v}" for k, v in keys.items()))


def test_parse_defaults_and_header():
    cfg = H.parse_config("[scenario]\nsigma = 1, 2\ncorr = 0.3\nscheme = poisson:1,2\ntheta = 0.1\nn = 100, 200")
    assert cfg.dim == 2 and cfg.scheme_args == (1.0, 2.0) and cfg.n == (100, 200)
    assert H.parse_config("noise = 0.04\nsigma = 2").theta_value() == pytest.approx(0.1)


def test_config_errors_list_every_key():
    with pytest.raises(ConfigError) as err:
        H.parse_config("sigma = x\nreps = 0\ncolour = blue\nscheme = poisson:1,2\nweight = gauss\ntheta = 0.1")
    assert err.value.keys == ("colour", "reps", "scheme", "sigma", "weight")


def test_named_theta_needs_parametric_scenario():
    with pytest.raises(ConfigError) as err:
        H.parse_config("sigma = 1, 1\nnoise = 0.01\ntheta = oracle")
    assert err.value.keys == ("theta",)
    with pytest.raises(ConfigError):
        H.parse_config("sigma = 1\nnoise = 0\ntheta = optimal")


def test_optimal_theta_double_exponential_is_oracle():
    cfg = H.parse_config("sigma = 0.5\nnoise = 0.04\ntheta = optimal")
    assert cfg.theta_value() == pytest.approx(0.4, rel=1e-6)


def test_single_replication_matches_direct_estimate(tmp_path):
    cfg = cfg_for(tmp_path, "reps = 1")
    res = H.run_scenario(cfg, write=False).results[0]
    path, obs, _, _ = H.simulate_world(cfg, 2000, replication_rng(cfg.seed, 0, 0))
    rep = E.mrc(obs, cfg.weight_spec(), 0.2)
    sync = synchronize(obs, 1.0)
    entry = res["entries"]["11"]
    assert entry["mean_estimate"] == rep.estimate[0, 0]
    assert entry["mean_truth"] == pytest.approx(path.qv_between(sync.grid[0], sync.grid[-1])[0, 0])


def test_same_seed_same_json(tmp_path):
    cfg = cfg_for(tmp_path)
    a = H.run_scenario(cfg, write=False).to_json()
    b = H.run_scenario(cfg, write=False).to_json()
    c = H.run_scenario(cfg_for(tmp_path, "seed = 6"), write=False).to_json()
    assert a == b and a != c


def test_worker_count_does_not_matter(tmp_path):
    cfg = cfg_for(tmp_path, "scheme = poisson:1,2\nsigma = 1, 1\ncorr = 0.4")
    assert H.run_scenario(cfg, workers=1, write=False).to_json() == H.run_scenario(cfg, workers=2, write=False).to_json()


def test_env_workers(monkeypatch):
    monkeypatch.setenv(H.WORKERS_ENV, "3")
    assert H.default_workers() == 3
    monkeypatch.setenv(H.WORKERS_ENV, "lots")
    assert H.default_workers() == 1


def test_failures_are_recorded(tmp_path):
    # k_n = 5 * sqrt(20) ~ 22 leaves too few points to jitter
    cfg = cfg_for(tmp_path, "theta = 5\nn = 20\nreps = 3")
    res = H.run_scenario(cfg).results[0]
    assert res["failures"] == 3 and res["failed_reps"] == [0, 1, 2] and res["entries"] == {}
    assert (tmp_path / "summary.json").exists()


def test_outputs_round_trip(tmp_path):
    summary = H.run_scenario(cfg_for(tmp_path, "n = 1000, 4000"))
    assert json.loads((tmp_path / "summary.json").read_text()) == json.loads(summary.to_json())
    recs = H.read_replications(tmp_path / "reps_n1000.csv")
    assert H.aggregate(recs, 1000) == summary.results[0]
    slopes = H.emit_plot_data(summary)
    qq = np.loadtxt(tmp_path / "qq_n4000_11.csv", delimiter=",", skiprows=1)
    assert qq.shape == (12, 2) and np.all(np.diff(qq[:, 1]) >= 0)
    assert slopes["11"] is not None and (tmp_path / "rmse_vs_n.csv").exists()


def test_aggregate_invariants(tmp_path):
    res = H.run_scenario(cfg_for(tmp_path), write=False).results[0]["entries"]["11"]
    assert res["rmse"] >= abs(res["bias"]) and 0 <= res["coverage"] <= 1


def test_estimator_variants(tmp_path):
    for extra in ("estimator = rk", "estimator = mrc-fast", "estimator = threshold\njumps = 0.5:1.0",
                  "estimator = param-jump\njumps = 0.5:1.0", "scheme = hitting:1,1\nfine_factor = 20",
                  "heston = 5,1,0.3,1,-0.5\nfine_factor = 2", "weight = tent\nconstruction = jittered"):
        res = H.run_scenario(cfg_for(tmp_path, extra + "\nreps = 3"), write=False).results[0]
        assert res["failures"] == 0, (extra, res)
        assert all(math.isfinite(v["z"]["mean"]) for v in res["entries"].values())


def test_compare_flags_degenerate_noise(tmp_path):
    rows = H.compare_efficiency(cfg_for(tmp_path, "noise = 0\nreps = 3"))
    assert {r["estimator"] for r in rows} == {"mrc-tent", "mrc-doubleexp", "rk-opt"}
    assert all(r["degenerate"] and r["ratio"] is None for r in rows)


def test_compare_ratios_near_theory(tmp_path):
    rows = H.compare_efficiency(cfg_for(tmp_path, "n = 10000\nreps = 150"))
    by = {r["estimator"]: r for r in rows}
    assert by["mrc-doubleexp"]["theory_ratio"] == pytest.approx(1.0)
    assert by["mrc-tent"]["theory_ratio"] > 1.0
    for r in rows:
        assert 0.6 < r["ratio"] / r["theory_ratio"] < 1.5


def test_rmse_rate(tmp_path):
    cfg = cfg_for(tmp_path, "estimator = mrc-fast\ntheta = oracle\nn = 1000, 4000, 16000, 64000\nreps = 100")
    slope = H.emit_plot_data(H.run_scenario(cfg))["11"]
    assert -0.35 < slope < -0.15
