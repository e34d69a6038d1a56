"""Time the compiled kernels against the NumPy fallback.

Usage::

    python benchmarks/bench_backends.py [--repeat 5] [--json out.json]

Each kernel runs on the same inputs under both implementations; the best
of ``repeat`` timings is reported along with the speed-up.
"""
import argparse
import json
import timeit

import numpy as np

from mrcov import _backend


def cases(rng):
    m = 200_000
    series = [np.sort(rng.uniform(0, 1, k)) for k in (50_000, 80_000, 30_000)]
    path = np.concatenate([[0.0], np.cumsum(rng.normal(0, 1e-3, m))])
    n = 100_000
    return {
        "refresh_scan": (np.concatenate(series), np.cumsum([0] + [s.size for s in series])),
        "hitting_scan": (path, np.full(m, 1e-6), 0.01, 0.01, rng.uniform(size=m), True),
        "exp_two_sided": (rng.normal(size=(n, 2)), 0.97),
        "window_sum": (rng.normal(size=(20_000, 1)), rng.normal(size=561), -280, 20_000),
        "tridiagonal_solve": (-np.ones(n - 1), np.full(n, 3.0), -np.ones(n - 1), rng.normal(size=n)),
    }


def run(repeat):
    impls = _backend.implementations()
    rows = []
    for name, args in cases(np.random.default_rng(0)).items():
        row = {"kernel": name}
        for label, mod in impls.items():
            fn = getattr(mod, name)
            row[label] = min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))
        if "cython" in row:
            row["speedup"] = row["python"] / row["cython"]
        rows.append(row)
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--json")
    a = p.parse_args()
    rows = run(a.repeat)
    print(f"{'kernel':<18} {'python [s]':>11} {'cython [s]':>11} {'speed-up':>9}")
    for r in rows:
        cy = f"{r['cython']:11.4f}" if "cython" in r else f"{'n/a':>11}"
        sp = f"{r['speedup']:9.1f}" if "speedup" in r else f"{'-':>9}"
        print(f"{r['kernel']:<18} {r['python']:11.4f} {cy} {sp}")
    if a.json:
        with open(a.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
