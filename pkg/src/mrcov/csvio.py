"""CSV serialization of tick schedules and synchronized grids.

Tick files have the header ``asset_id,time,value`` (``value`` may be
empty); grid files have ``p,T_p,tau_1,...,tau_d``.
"""
import csv
from collections import defaultdict

import numpy as np

from .errors import InvalidInput
from .timegrid import SyncGrid, TickSchedule

TICK_HEADER = ["asset_id", "time", "value"]


def write_ticks(path, schedules):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(TICK_HEADER)
        for s in schedules:
            vals = s.values if s.values is not None else [None] * len(s)
            for t, v in zip(s.times, vals):
                w.writerow([s.asset_id, repr(float(t)), "" if v is None else repr(float(v))])


def read_ticks(path):
    """Schedules sorted by asset id; values are kept only if every row has one."""
    times, values = defaultdict(list), defaultdict(list)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"asset_id", "time"} <= set(reader.fieldnames):
            raise InvalidInput(f"{path}: header must be asset_id,time,value")
        for lineno, row in enumerate(reader, start=2):
            try:
                k = int(row["asset_id"])
                times[k].append(float(row["time"]))
                v = (row.get("value") or "").strip()
                values[k].append(float(v) if v else None)
            except (TypeError, ValueError):
                raise InvalidInput(f"{path}:{lineno}: malformed row") from None
    out = []
    for k in sorted(times):
        vals = values[k]
        v = None if any(x is None for x in vals) else np.array(vals)
        out.append(TickSchedule(k, np.array(times[k]), v))
    if not out:
        raise InvalidInput(f"{path}: no ticks")
    return out


def write_grid(path, sync: SyncGrid):
    d = sync.n_assets
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "T_p"] + [f"tau_{k + 1}" for k in range(d)])
        for p, T in enumerate(sync.grid):
            w.writerow([p, repr(float(T))] + [repr(float(sync.taus[k, p])) for k in range(d)])


def read_grid(path, horizon=None):
    """Grid and taus; ``indices`` are positions in each asset's tau column."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    grid = data[:, 1].copy()
    taus = np.ascontiguousarray(data[:, 2:].T)
    idx = np.tile(np.arange(grid.size), (taus.shape[0], 1))
    return SyncGrid(grid, idx, taus, float(horizon if horizon is not None else grid[-1]))
