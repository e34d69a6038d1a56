"""Command-line interface: ``mrcov <subcommand> ...``."""
import argparse
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import csvio, estimators, mc_harness, param_jump, weights
from .errors import ConfigError, InvalidInput, InvalidModel, NumericFailure
from .market_sim import replication_rng
from .timegrid import synchronize


def _dump(obj, out):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _scenario_from_args(a):
    lines = [f"sigma = {a.sigma}", f"corr = {a.corr}", f"noise = {a.noise}", f"scheme = {a.scheme}",
             f"jumps = {a.jumps}", f"heston = {a.heston}", f"n = {a.n}", f"seed = {a.seed}",
             "theta = 0.1"]
    return mc_harness.parse_config("\n".join(lines))


def cmd_simulate(a):
    cfg = _scenario_from_args(a)
    n = cfg.n[0]
    path, obs, chi, G = mc_harness.simulate_world(cfg, n, replication_rng(cfg.seed, 0))
    csvio.write_ticks(a.out, obs)
    sync = synchronize(obs, 1.0)
    if a.grid:
        csvio.write_grid(a.grid, sync)
    truth = {
        "qv": path.qv_between(sync.grid[0], sync.grid[-1]).tolist(),
        "sigma": path.base_cov.tolist() if cfg.heston is None else None,
        "noise": cfg.noise,
        "chi": np.asarray(chi).tolist(),
        "G": float(np.mean(G)),
        "n": n,
        "jump_sum": math.fsum(g * g for _, g in cfg.jumps),
    }
    if a.truth:
        _dump(truth, a.truth)
    print(f"wrote {sum(len(s) for s in obs)} ticks for {len(obs)} asset(s) to {a.out}", file=sys.stderr)


def cmd_estimate(a):
    ticks = csvio.read_ticks(a.ticks)
    spec = weights.from_name(a.weight)
    if a.fast:
        if spec.bounded:
            raise InvalidInput("--fast needs a double-exponential weight")
        rep = estimators.mrc_fast_exponential(ticks, spec.decay, a.theta)
    else:
        rep = estimators.mrc(ticks, spec, a.theta, construction=a.construction, diagnostics=True)
    if a.truth:
        truth = json.loads(Path(a.truth).read_text(encoding="utf-8"))
        n = truth.get("n", rep.N_T)
        if truth.get("sigma") is not None:
            d = rep.estimate.shape[0]
            avar = estimators.oracle_avar(truth["sigma"], truth["noise"] * np.eye(d), truth["chi"],
                                          truth["G"], spec, rep.k_n / math.sqrt(n))
            rep.stderr = np.sqrt(np.einsum("klkl->kl", avar)) / n ** 0.25
            rep.z, _ = estimators.studentize(rep.estimate, truth["qv"], avar, n)
    _dump(rep.to_dict(), a.out)


def cmd_decompose(a):
    ticks = csvio.read_ticks(a.ticks)
    if len(ticks) != 1:
        raise InvalidInput("decompose expects a single asset")
    s1, s2 = weights.from_name(a.weight_iv), weights.from_name(a.weight_jv)
    c = a.c
    if c is None:
        if a.sigma is None or a.noise is None:
            raise InvalidInput("give --c, or --sigma and --noise for the default threshold")
        N = len(ticks[0]) - 1
        k = weights.window_size(a.theta, N)
        c = estimators.default_threshold_constant([s1, s2], k, N, a.sigma, a.noise, a.w)
    dec = estimators.threshold_estimators(ticks, s1, s2, c, a.w, a.theta)
    _dump(dec.to_dict(), a.out)


def cmd_param_jump(a):
    S = [float(x) for x in a.S.split(",")]
    g = [float(x) for x in a.gamma.split(",")]
    model = param_jump.ParametricModel(a.n, a.sigma, a.noise, S, g)
    K = len(S)
    fisher = [[param_jump.fisher_entry(a.n, a.sigma, a.noise, k, l, S) for l in range(K)] for k in range(K)]
    direct = [[param_jump.fisher_entry_direct(a.n, a.sigma, a.noise, k, l, S) for l in range(K)]
              for k in range(K)]
    est = np.array([param_jump.jump_mle(model.simulate(replication_rng(a.seed, r)), a.sigma, a.noise, S)
                    for r in range(a.reps)])
    err = (est - np.array(g)) * a.n ** 0.25
    out = {
        "n": a.n, "sigma": a.sigma, "noise": a.noise, "S": S, "gamma": g, "reps": a.reps, "seed": a.seed,
        "fisher": fisher,
        "fisher_direct_max_abs_diff": float(np.max(np.abs(np.subtract(fisher, direct)))),
        "fisher_limit": 1.0 / (2.0 * a.sigma * math.sqrt(a.noise)),
        "mean_estimate": est.mean(axis=0).tolist(),
        "var_scaled": err.var(axis=0, ddof=1).tolist() if a.reps > 1 else None,
        "var_limit": 2.0 * a.sigma * math.sqrt(a.noise),
        "corr": np.corrcoef(err.T).tolist() if K > 1 and a.reps > 2 else None,
    }
    _dump(out, a.out)


def cmd_montecarlo(a):
    cfg = mc_harness.load_config(a.config)
    if a.output:
        cfg = replace(cfg, output=a.output)
    summary = mc_harness.run_scenario(cfg, workers=a.workers)
    if a.plots:
        mc_harness.emit_plot_data(summary)
    print(str(Path(cfg.output) / "summary.json"))


def cmd_report(a):
    data = json.loads(Path(a.summary).read_text(encoding="utf-8"))
    print(f"scenario {data['scenario']}  estimator {data['config']['estimator']}  "
          f"weight {data['config']['weight']}")
    print(f"{'n':>8} {'entry':>5} {'bias':>11} {'rmse':>10} {'var(n^1/4 e)':>13} {'z mean':>7} "
          f"{'z var':>6} {'skew':>6} {'kurt':>6} {'cover':>6} {'fail':>4}")

    def f(x, spec):
        return format(x, spec) if x is not None else "-"

    for res in data["results"]:
        for e, v in sorted(res["entries"].items()):
            z = v["z"]
            print(f"{res['n']:>8} {e:>5} {v['bias']:>11.3e} {v['rmse']:>10.3e} {f(v['var_scaled'], '>13.4f')} "
                  f"{f(z['mean'], '>7.3f')} {f(z['var'], '>6.3f')} {f(z['skew'], '>6.2f')} "
                  f"{f(z['kurt'], '>6.2f')} {f(v['coverage'], '>6.3f')} {res['failures']:>4}")
    if a.plots:
        cfg = mc_harness.ScenarioConfig(**_config_fields(data["config"]))
        base = Path(a.summary).parent
        records = {r["n"]: mc_harness.read_replications(base / f"reps_n{r['n']}.csv") for r in data["results"]}
        summary = mc_harness.MCSummary(cfg, data["results"], records)
        slopes = mc_harness.emit_plot_data(summary, base)
        for e, s in sorted(slopes.items()):
            print(f"log-log RMSE slope [{e}]: {s if s is None else round(s, 4)}")


def _config_fields(d):
    out = dict(d)
    for key in ("sigma", "n", "scheme_args"):
        out[key] = tuple(out[key])
    out["jumps"] = tuple(tuple(j) for j in out["jumps"])
    if out.get("heston") is not None:
        out["heston"] = tuple(out["heston"])
    return out


def cmd_weights(a):
    names = a.names or ["tent", "doubleexp", "doubleexp:sqrt(5)"]
    ys = np.linspace(0.0, a.ymax, a.points)
    for name in names:
        spec = weights.from_name(name)
        q = spec.quadrature
        print(f"# {spec.name} ({spec.support})")
        for key, val, err in zip(weights.Constants._fields, q.values, q.errors):
            closed = "" if spec.closed is None else f"  closed={getattr(spec.closed, key):.12g}"
            print(f"{key:>6} = {val:.12g}  (quad err {err:.1e}){closed}")
        print(f"{'y':>8} {'phi_gg':>14} {'phi_dgdg':>14} {'phi_dgg':>14}")
        for y in ys:
            print(f"{y:8.3f} {weights.phi('g', 'g', spec, y, closed=False):14.8g} "
                  f"{weights.phi('dg', 'dg', spec, y, closed=False):14.8g} "
                  f"{weights.phi('dg', 'g', spec, y, closed=False):14.8g}")


def cmd_compare(a):
    cfg = mc_harness.load_config(a.config)
    rows = mc_harness.compare_efficiency(cfg, workers=a.workers)
    _dump(rows, a.out)


def build_parser():
    p = argparse.ArgumentParser(prog="mrcov", description="Pre-averaging covariance estimation toolkit.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate noisy ticks to a CSV")
    s.add_argument("--out", required=True)
    s.add_argument("--grid", help="also write the synchronized grid CSV")
    s.add_argument("--truth", help="write the simulated truth as JSON")
    s.add_argument("--sigma", default="1.0")
    s.add_argument("--corr", default="0.0")
    s.add_argument("--noise", default="0.0")
    s.add_argument("--scheme", default="equidistant")
    s.add_argument("--jumps", default="none")
    s.add_argument("--heston", default="none")
    s.add_argument("--n", default="10000")
    s.add_argument("--seed", default="0")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("estimate", help="MRC estimate from a tick CSV")
    s.add_argument("ticks")
    s.add_argument("--weight", default="doubleexp")
    s.add_argument("--theta", type=float, required=True)
    s.add_argument("--construction", default="auto", choices=["auto", "bounded", "jittered"])
    s.add_argument("--fast", action="store_true", help="O(N) path for double-exponential weights")
    s.add_argument("--truth", help="truth JSON from `simulate --truth` for standard errors")
    s.add_argument("--out")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("decompose", help="threshold IV/JV split")
    s.add_argument("ticks")
    s.add_argument("--weight-iv", default="doubleexp")
    s.add_argument("--weight-jv", default="doubleexp:sqrt(5)")
    s.add_argument("--theta", type=float, required=True)
    s.add_argument("--c", type=float)
    s.add_argument("--w", type=float, default=0.2)
    s.add_argument("--sigma", type=float)
    s.add_argument("--noise", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("param-jump", help="Fisher check and MLE Monte Carlo")
    s.add_argument("--n", type=int, default=4000)
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--noise", type=float, default=1.0)
    s.add_argument("--S", default="0.5")
    s.add_argument("--gamma", default="1.0")
    s.add_argument("--reps", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_param_jump)

    s = sub.add_parser("montecarlo", help="run a scenario config")
    s.add_argument("config")
    s.add_argument("--workers", type=int, help=f"default ${mc_harness.WORKERS_ENV} or 1")
    s.add_argument("--output")
    s.add_argument("--plots", action="store_true", help="also write QQ and RMSE-vs-n CSVs")
    s.set_defaults(func=cmd_montecarlo)

    s = sub.add_parser("report", help="print a summary.json as a table")
    s.add_argument("summary")
    s.add_argument("--plots", action="store_true")
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("weights", help="print weight constants and a phi table")
    s.add_argument("names", nargs="*")
    s.add_argument("--ymax", type=float, default=1.0)
    s.add_argument("--points", type=int, default=11)
    s.set_defaults(func=cmd_weights)

    s = sub.add_parser("compare", help="efficiency comparison of tent, double-exp and RK")
    s.add_argument("config")
    s.add_argument("--workers", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_compare)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (InvalidInput, InvalidModel, NumericFailure, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
