"""Config-driven Monte Carlo experiments.

A scenario is a key-value text file (an optional ``[scenario]`` header is
allowed)::

    name = parametric
    sigma = 1.0                # per-asset volatilities, comma separated
    corr = 0.0                 # common correlation
    heston = none              # or kappa,mean,xi,v0[,rho]
    noise = 0.01               # noise variance per asset
    jumps = none               # or time:size, time:size ...
    scheme = equidistant       # | poisson:p1,p2,... | hitting:alpha,beta
    estimator = mrc            # | mrc-fast | rk | threshold | param-jump
    weight = doubleexp         # tent | doubleexp[:rate] | pwl:x:y,...
    weight_jv = doubleexp:sqrt(5)
    theta = oracle             # number | oracle | optimal
    threshold_c = auto
    threshold_w = 0.2
    threshold_multiple = 5
    fine_factor = 100          # fine steps per unit of n (hitting, Heston)
    n = 10000, 160000
    reps = 1000
    seed = 42
    output = mc_out/parametric

Replication ``r`` at the ``j``-th sample size draws from
``SeedSequence(seed, spawn_key=(j, r))``. Results are sorted by ``r`` and
summed with :func:`math.fsum`, so the summary does not depend on the
number of workers.
"""
import configparser
import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import norm

from . import estimators as est
from . import param_jump
from .errors import ConfigError, InvalidInput
from .market_sim import (HestonParams, JumpModel, NoiseModel, PathModel, hitting_observation_times,
                         observe, replication_rng, simulate_path)
from .timegrid import TickSchedule, poisson_G_limit, sample_poisson, synchronize
from .weights import WeightSpec, from_name, k_opt, kernel, window_size

logger = logging.getLogger(__name__)

WORKERS_ENV = "MRCOV_WORKERS"
ESTIMATORS = ("mrc", "mrc-fast", "rk", "threshold", "param-jump")
Z95 = float(norm.ppf(0.975))

_KEYS = {"name", "sigma", "corr", "heston", "noise", "jumps", "scheme", "estimator", "weight",
         "weight_jv", "theta", "threshold_c", "threshold_w", "threshold_multiple", "fine_factor",
         "n", "reps", "seed", "output", "construction"}


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    sigma: Tuple[float, ...] = (1.0,)
    corr: float = 0.0
    heston: Optional[Tuple[float, ...]] = None
    noise: float = 0.0
    jumps: Tuple[Tuple[float, float], ...] = ()
    scheme: str = "equidistant"
    scheme_args: Tuple[float, ...] = ()
    estimator: str = "mrc"
    weight: str = "doubleexp"
    weight_jv: str = "doubleexp:sqrt(5)"
    theta: str = "oracle"
    threshold_c: str = "auto"
    threshold_w: float = 0.2
    threshold_multiple: float = 5.0
    fine_factor: int = 100
    construction: str = "auto"
    n: Tuple[int, ...] = (10000,)
    reps: int = 100
    seed: int = 0
    output: str = "mc_out"

    @property
    def dim(self):
        return len(self.sigma)

    @property
    def parametric(self):
        return self.heston is None and self.dim == 1

    def path_model(self):
        h = None
        if self.heston is not None:
            vals = list(self.heston) + [0.0] * (5 - len(self.heston))
            h = HestonParams(*vals[:5])
        base = PathModel.constant(np.array(self.sigma), self.dim, self.corr)
        return PathModel(base.cov, heston=h)

    def weight_spec(self) -> WeightSpec:
        return from_name(self.weight)

    def theta_value(self) -> float:
        """Numeric ``theta``; ``oracle`` and ``optimal`` need a parametric scenario."""
        if self.theta not in ("oracle", "optimal"):
            return float(self.theta)
        if not self.parametric or self.noise <= 0:
            raise ConfigError(f"theta={self.theta} needs constant univariate volatility and noise > 0",
                              ["theta"])
        if self.theta == "oracle":
            return est.oracle_theta(self.sigma[0], self.noise)
        return optimal_theta(self.weight_spec(), self.sigma[0], self.noise)

    def to_dict(self):
        return asdict(self)


def optimal_theta(spec: WeightSpec, sigma, upsilon):
    """``theta`` minimizing ``v_C^2`` for this weight."""
    ref = math.sqrt(upsilon) / sigma
    res = minimize_scalar(lambda lt: est.v_C_v_J(spec, ref * math.exp(lt), sigma, upsilon)[0],
                          bounds=(-5.0, 5.0), method="bounded", options={"xatol": 1e-10})
    return ref * math.exp(res.x)


# -- parsing ----------------------------------------------------------------------

def parse_config(text: str) -> ScenarioConfig:
    """Parse the key-value scenario format; every bad key is reported at once."""
    if not text.lstrip().startswith("["):
        text = "[scenario]\n" + text
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from exc
    section = cp[cp.sections()[0]] if cp.sections() else {}
    raw = dict(section)
    bad, kw = [], {}
    unknown = sorted(set(raw) - _KEYS)
    bad.extend(unknown)

    def take(key, conv):
        if key not in raw:
            return
        try:
            kw[key] = conv(raw[key].strip())
        except (ValueError, TypeError, InvalidInput):
            bad.append(key)

    def floats(s):
        return tuple(float(x) for x in s.split(",") if x.strip())

    def ints(s):
        return tuple(int(float(x)) for x in s.split(",") if x.strip())

    take("name", str)
    take("sigma", floats)
    take("corr", float)
    take("heston", lambda s: None if s.lower() == "none" else floats(s))
    take("noise", float)
    take("jumps", _parse_jumps)
    take("estimator", str)
    take("weight", str)
    take("weight_jv", str)
    take("theta", str)
    take("threshold_c", str)
    take("threshold_w", float)
    take("threshold_multiple", float)
    take("fine_factor", int)
    take("construction", str)
    take("n", ints)
    take("reps", int)
    take("seed", int)
    take("output", str)
    if "scheme" in raw:
        try:
            kw["scheme"], kw["scheme_args"] = _parse_scheme(raw["scheme"])
        except ValueError:
            bad.append("scheme")
    cfg = ScenarioConfig(**kw)
    bad.extend(_check(cfg, bad))
    if bad:
        keys = sorted(set(bad))
        raise ConfigError("invalid config keys: " + ", ".join(keys), keys)
    return cfg


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _parse_jumps(s):
    if s.lower() in ("", "none"):
        return ()
    out = []
    for item in s.split(","):
        t, _, g = item.strip().partition(":")
        out.append((float(t), float(g)))
    return tuple(out)


def _parse_scheme(s):
    head, _, arg = s.strip().partition(":")
    head = head.lower()
    if head == "equidistant" and not arg:
        return head, ()
    if head in ("poisson", "hitting") and arg:
        return head, tuple(float(x) for x in arg.split(","))
    raise ValueError(s)


def _check(cfg, already):
    bad = []
    if cfg.reps < 1:
        bad.append("reps")
    if not cfg.n or min(cfg.n) < 16:
        bad.append("n")
    if any(s < 0 for s in cfg.sigma) or not cfg.sigma:
        bad.append("sigma")
    if cfg.noise < 0:
        bad.append("noise")
    if cfg.estimator not in ESTIMATORS:
        bad.append("estimator")
    if cfg.construction not in ("auto", "bounded", "jittered"):
        bad.append("construction")
    if cfg.scheme == "poisson" and (len(cfg.scheme_args) != cfg.dim or min(cfg.scheme_args) <= 0):
        bad.append("scheme")
    if cfg.scheme == "hitting" and (len(cfg.scheme_args) != 2 or cfg.dim != 1 or min(cfg.scheme_args) <= 0):
        bad.append("scheme")
    if cfg.heston is not None and len(cfg.heston) not in (4, 5):
        bad.append("heston")
    if cfg.dim > 1 and cfg.estimator in ("rk", "threshold", "param-jump"):
        bad.append("estimator")
    if cfg.estimator == "param-jump" and (cfg.scheme != "equidistant" or cfg.heston is not None
                                          or cfg.noise <= 0):
        bad.append("estimator")
    if cfg.estimator == "threshold" and not 0.125 < cfg.threshold_w < 0.25:
        bad.append("threshold_w")
    if any(not 0 < t < 1 for t, _ in cfg.jumps):
        bad.append("jumps")
    for key in ("weight", "weight_jv"):
        if key in already:
            continue
        try:
            from_name(getattr(cfg, key))
        except InvalidInput:
            bad.append(key)
    if "theta" not in already and "weight" not in bad:
        try:
            th = cfg.theta_value()
            if not th > 0:
                bad.append("theta")
        except (ConfigError, ValueError):
            bad.append("theta")
    if cfg.threshold_c != "auto":
        try:
            if not float(cfg.threshold_c) > 0:
                bad.append("threshold_c")
        except ValueError:
            bad.append("threshold_c")
    return bad


# -- one replication -----------------------------------------------------------------

def simulate_world(cfg: ScenarioConfig, n: int, rng):
    """Latent path, observed schedules, and the oracle ingredients ``(chi, G)``."""
    model = cfg.path_model()
    d = cfg.dim
    noise = NoiseModel.scalar(cfg.noise, d)
    jumps = JumpModel(*zip(*cfg.jumps)) if cfg.jumps else None
    if cfg.scheme == "hitting":
        alpha, beta = cfg.scheme_args
        path = simulate_path(model, fine_steps=max(1000, cfg.fine_factor * n), rng=rng)
        hits = hitting_observation_times(path, alpha, beta, n, rng=rng)
        sched = [hits.schedule]
        G = alpha * beta / (path.scale * model.cov[0, 0])
        chi = np.ones((1, 1))
    else:
        if cfg.scheme == "equidistant":
            t = np.arange(n + 1) / n
            sched_times = [t] * d
            chi = np.ones((d, d))
            G = 1.0
        else:
            sched_times = [s.times for s in sample_poisson(cfg.scheme_args, n, 1.0, rng)]
            chi = np.eye(d)
            G = poisson_G_limit(cfg.scheme_args)
        union = np.unique(np.concatenate([[0.0, 1.0]] + sched_times))
        if cfg.heston is not None:
            union = np.unique(np.concatenate([union, np.linspace(0.0, 1.0, cfg.fine_factor * n + 1)]))
        path = simulate_path(model, times=union, rng=rng)
        sched = [TickSchedule(k, sched_times[k]) for k in range(d)]
    obs = observe(path, sched, noise, jumps=jumps, rng=rng)
    return path, obs, chi, G


def _oracle(cfg, path, chi, G, spec, theta_eff):
    if cfg.heston is None:
        return est.oracle_avar(path.base_cov, cfg.noise * np.eye(cfg.dim), chi,
                               float(np.mean(G)) if np.ndim(G) else G, spec, theta_eff)
    stride = max(1, path.scale.size // 4000)
    sl = slice(None, None, stride)
    t = path.times[:-1][sl]
    S = path.scale[sl][:, None, None] * path.base_cov[None]
    Gp = G[sl] if np.ndim(G) else G
    return est.oracle_avar(S, cfg.noise * np.eye(cfg.dim), chi, Gp, spec, theta_eff, t_grid=t)


def _entries(d):
    return [(k, l) for k in range(d) for l in range(k, d)]


def run_replication(cfg: ScenarioConfig, n: int, stream: int, r: int) -> dict:
    """One replication; returns a record with per-entry estimate, truth and z-score."""
    rng = replication_rng(cfg.seed, r, stream)
    if cfg.estimator == "param-jump":
        return _param_jump_rep(cfg, n, rng, r)
    path, obs, chi, G = simulate_world(cfg, n, rng)
    sync = synchronize(obs, 1.0)
    V = sync.values(obs)
    N = sync.n_returns
    theta = cfg.theta_value()
    spec = cfg.weight_spec()
    k = window_size(theta, N)
    theta_eff = k / math.sqrt(n)
    truth = path.qv_between(sync.grid[0], sync.grid[-1])
    rec = {"rep": r, "ok": True, "k_n": k, "N_T": N, "values": {}}

    if cfg.estimator in ("mrc", "mrc-fast"):
        if cfg.estimator == "mrc-fast":
            if spec.bounded:
                raise InvalidInput("mrc-fast needs a double-exponential weight")
            value = est.mrc_fast_exponential(V, spec.decay, theta, k_n=k).estimate
        else:
            value = est.mrc_values(V, spec, k, cfg.construction)[0]
        avar = _oracle(cfg, path, chi, G, spec, theta_eff)
        z, _ = est.studentize(value, truth, avar, n)
        for a, b in _entries(cfg.dim):
            rec["values"][f"{a + 1}{b + 1}"] = (float(value[a, b]), float(truth[a, b]), float(z[a, b]))
    elif cfg.estimator == "rk":
        ret = est.jitter(V, k)[:, 0]
        K = k_opt if spec.name == "doubleexp" else kernel(spec)
        value = est.realized_kernel(ret, K, float(k))
        avar = _oracle(cfg, path, chi, G, spec, theta_eff)
        z, _ = est.studentize(value, truth[0, 0], avar, n)
        rec["values"]["11"] = (value, float(truth[0, 0]), float(z[0, 0]))
    else:
        rec["values"].update(_threshold(cfg, V, spec, k, n, N, theta_eff, truth))
    return rec


def _threshold(cfg, V, spec_iv, k, n, N, theta_eff, truth):
    spec_jv = from_name(cfg.weight_jv)
    sigma = cfg.sigma[0]
    if cfg.threshold_c == "auto":
        c = est.default_threshold_constant([spec_iv, spec_jv], k, N, sigma, cfg.noise,
                                           cfg.threshold_w, cfg.threshold_multiple)
    else:
        c = float(cfg.threshold_c)
    dec = est.threshold_estimators(V, spec_iv, spec_jv, c, cfg.threshold_w, 0.0, k_n=k)
    jump_sum = math.fsum(g * g for _, g in cfg.jumps)
    iv_true = float(truth[0, 0])
    vc, _ = est.v_C_v_J(spec_iv, theta_eff, sigma, cfg.noise)
    _, vj = est.v_C_v_J(spec_jv, theta_eff, sigma, cfg.noise, jump_sum)
    s = n ** 0.25
    z_iv = s * (dec.iv - iv_true) / math.sqrt(vc) if vc > 0 else float("nan")
    z_jv = s * (dec.jv - jump_sum) / math.sqrt(vj) if vj > 0 else float("nan")
    return {"jv": (dec.jv, jump_sum, z_jv), "iv": (dec.iv, iv_true, z_iv)}


def _param_jump_rep(cfg, n, rng, r):
    times = tuple(t for t, _ in cfg.jumps)
    sizes = tuple(g for _, g in cfg.jumps)
    model = param_jump.ParametricModel(n, cfg.sigma[0], cfg.noise, times, sizes)
    z = model.simulate(rng)
    gh = param_jump.jump_mle(z, model.sigma, model.upsilon, times)
    sd = math.sqrt(2.0 * model.sigma * math.sqrt(model.upsilon))
    vals = {}
    for j, (g, true) in enumerate(zip(gh, sizes)):
        vals[f"g{j + 1}"] = (float(g), true, n ** 0.25 * (float(g) - true) / sd)
    return {"rep": r, "ok": True, "k_n": 0, "N_T": n, "values": vals}


def _safe_replication(args):
    cfg, n, stream, r = args
    try:
        return run_replication(cfg, n, stream, r)
    except Exception as exc:  # recorded, never fatal
        return {"rep": r, "ok": False, "error": f"{type(exc).__name__}: {exc}", "values": {}}


# -- aggregation ---------------------------------------------------------------------

def _moments(x):
    m = len(x)
    if m == 0:
        return dict(mean=None, var=None, skew=None, kurt=None)
    mean = math.fsum(x) / m
    dev = [v - mean for v in x]
    var = math.fsum(v * v for v in dev) / (m - 1) if m > 1 else 0.0
    m2 = math.fsum(v * v for v in dev) / m
    if m2 > 0:
        skew = math.fsum(v ** 3 for v in dev) / m / m2 ** 1.5
        kurt = math.fsum(v ** 4 for v in dev) / m / m2 ** 2
    else:
        skew = kurt = None
    return dict(mean=mean, var=var, skew=skew, kurt=kurt)


def aggregate(records, n) -> dict:
    """Per-entry bias, RMSE, scaled MC variance, z moments and coverage."""
    records = sorted(records, key=lambda rec: rec["rep"])
    good = [rec for rec in records if rec["ok"]]
    out = {"n": n, "reps": len(records), "failures": len(records) - len(good),
           "failed_reps": [rec["rep"] for rec in records if not rec["ok"]], "entries": {}}
    if good:
        out["mean_k_n"] = math.fsum(rec["k_n"] for rec in good) / len(good)
        out["mean_N_T"] = math.fsum(rec["N_T"] for rec in good) / len(good)
    names = sorted({e for rec in good for e in rec["values"]})
    s = n ** 0.25
    for e in names:
        rows = [rec["values"][e] for rec in good if e in rec["values"]]
        err = [v - t for v, t, _ in rows]
        z = [zz for _, _, zz in rows if math.isfinite(zz)]
        m = len(err)
        bias = math.fsum(err) / m
        rmse = math.sqrt(math.fsum(x * x for x in err) / m)
        scaled = _moments([s * x for x in err])
        out["entries"][e] = {
            "mean_estimate": math.fsum(v for v, _, _ in rows) / m,
            "mean_truth": math.fsum(t for _, t, _ in rows) / m,
            "bias": bias,
            "rmse": rmse,
            "var_scaled": scaled["var"],
            "z": _moments(z),
            "coverage": (sum(abs(x) <= Z95 for x in z) / len(z)) if z else None,
            "count": m,
        }
    return out


@dataclass
class MCSummary:
    config: ScenarioConfig
    results: List[dict]
    records: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def to_dict(self):
        return {"scenario": self.config.name, "config": self.config.to_dict(), "results": self.results}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=True)


def default_workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run_scenario(cfg: ScenarioConfig, workers: Optional[int] = None, write: bool = True) -> MCSummary:
    """Run every ``(n, rep)`` pair and aggregate; persists JSON and CSV when ``write``."""
    workers = default_workers() if workers is None else max(1, int(workers))
    results, records, timing = [], {}, {}
    for stream, n in enumerate(cfg.n):
        jobs = [(cfg, n, stream, r) for r in range(cfg.reps)]
        t0 = time.perf_counter()
        if workers == 1:
            recs = [_safe_replication(j) for j in jobs]
        else:
            chunk = max(1, len(jobs) // (4 * workers))
            with ProcessPoolExecutor(max_workers=workers) as pool:
                recs = list(pool.map(_safe_replication, jobs, chunksize=chunk))
        elapsed = time.perf_counter() - t0
        for rec in recs:
            if not rec["ok"]:
                logger.warning("replication %d at n=%d failed: %s", rec["rep"], n, rec["error"])
        records[n] = sorted(recs, key=lambda rec: rec["rep"])
        results.append(aggregate(recs, n))
        timing[str(n)] = {"seconds": elapsed, "per_rep": elapsed / len(jobs), "workers": workers}
    summary = MCSummary(cfg, results, records, timing)
    if write:
        write_outputs(summary, cfg.output)
    return summary


def write_outputs(summary: MCSummary, outdir):
    """``summary.json``, ``timing.json`` and ``reps_n<n>.csv`` in ``outdir``."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(summary.to_json() + "\n", encoding="utf-8")
    (out / "timing.json").write_text(json.dumps(summary.timing, indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8")
    for n, recs in summary.records.items():
        write_replications(out / f"reps_n{n}.csv", recs)
    return out


def write_replications(path, recs):
    names = sorted({e for rec in recs for e in rec["values"]})
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["rep", "ok", "k_n", "N_T"] + [f"{p}_{e}" for e in names for p in ("est", "truth", "z")]
                   + ["error"])
        for rec in recs:
            row = [rec["rep"], int(rec["ok"]), rec.get("k_n", ""), rec.get("N_T", "")]
            for e in names:
                row.extend(repr(x) for x in rec["values"].get(e, ("", "", "")))
            row.append(rec.get("error", ""))
            w.writerow(row)


def read_replications(path):
    recs = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        names = sorted({c[4:] for c in reader.fieldnames if c.startswith("est_")})
        for row in reader:
            ok = row["ok"] == "1"
            vals = {e: tuple(float(row[f"{p}_{e}"]) for p in ("est", "truth", "z"))
                    for e in names if ok and row[f"est_{e}"]}
            recs.append({"rep": int(row["rep"]), "ok": ok, "values": vals,
                         "k_n": float(row["k_n"] or 0), "N_T": float(row["N_T"] or 0)})
    return recs


# -- plot data -----------------------------------------------------------------------

def emit_plot_data(summary: MCSummary, outdir=None) -> dict:
    """QQ points of z-scores per ``(n, entry)`` and RMSE-vs-n log-log points.

    Files: ``qq_n<n>_<entry>.csv`` with ``theoretical,empirical`` and
    ``rmse_vs_n.csv`` with ``entry,n,log_n,rmse,log_rmse``. Returns the
    fitted log-log slope per entry (``None`` with fewer than two sizes).
    """
    if not summary.results:
        raise InvalidInput("empty summary")
    out = Path(outdir or summary.config.output)
    out.mkdir(parents=True, exist_ok=True)
    for n, recs in summary.records.items():
        names = sorted({e for rec in recs if rec["ok"] for e in rec["values"]})
        for e in names:
            z = np.sort([rec["values"][e][2] for rec in recs if rec["ok"] and e in rec["values"]])
            z = z[np.isfinite(z)]
            q = norm.ppf((np.arange(1, z.size + 1) - 0.5) / max(z.size, 1))
            with open(out / f"qq_n{n}_{e}.csv", "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["theoretical", "empirical"])
                w.writerows([repr(float(a)), repr(float(b))] for a, b in zip(q, z))
    slopes = {}
    with open(out / "rmse_vs_n.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["entry", "n", "log_n", "rmse", "log_rmse"])
        names = sorted({e for res in summary.results for e in res["entries"]})
        for e in names:
            pts = [(res["n"], res["entries"][e]["rmse"]) for res in summary.results if e in res["entries"]]
            for n, r in pts:
                w.writerow([e, n, repr(math.log(n)), repr(r), repr(math.log(r)) if r > 0 else ""])
            slopes[e] = rmse_slope(pts)
    return slopes


def rmse_slope(points):
    """Least-squares slope of ``log rmse`` on ``log n``."""
    pts = [(n, r) for n, r in points if r > 0]
    if len(pts) < 2:
        return None
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])


# -- efficiency comparison ---------------------------------------------------------

def compare_efficiency(base: ScenarioConfig, workers=None, write=False) -> List[dict]:
    """MC variance of ``n^{1/4}`` error for tent MRC, double-exponential MRC and RK with ``K_opt``.

    Each weight uses its own variance-minimizing ``theta``. Ratios are
    against ``8 sigma^3 sqrt(Upsilon)``; with no noise that bound is zero
    and the ratio is flagged as degenerate.
    """
    sigma, ups = base.sigma[0], base.noise
    bound = 8.0 * sigma ** 3 * math.sqrt(ups)
    variants = [("mrc-tent", replace(base, estimator="mrc", weight="tent")),
                ("mrc-doubleexp", replace(base, estimator="mrc", weight="doubleexp")),
                ("rk-opt", replace(base, estimator="rk", weight="doubleexp"))]
    rows = []
    for label, cfg in variants:
        spec = cfg.weight_spec()
        if ups > 0:
            theta = optimal_theta(spec, sigma, ups)
            theory = est.v_C_v_J(spec, theta, sigma, ups)[0]
        else:
            theta, theory = 0.1, float("nan")
        cfg = replace(cfg, theta=repr(theta), output=str(Path(base.output) / label))
        res = run_scenario(cfg, workers=workers, write=write).results
        for r in res:
            var = r["entries"]["11"]["var_scaled"]
            rows.append({"estimator": label, "n": r["n"], "theta": theta, "var_scaled": var,
                         "theory": theory,
                         "ratio": var / bound if bound > 0 else None,
                         "theory_ratio": theory / bound if bound > 0 else None,
                         "degenerate": not bound > 0})
    return rows
