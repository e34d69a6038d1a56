"""Observation-time schemes and multi-asset synchronization.

Times are float64 in horizon units. Refresh times follow the all-refresh
rule and every asset is interpolated by its *next* tick, so for a grid
``T`` and interpolated times ``tau`` we always have
``tau[k, 0] <= T[0]`` and ``T[p-1] < tau[k, p] <= T[p]``.
"""
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from . import _backend
from .errors import InvalidInput


@dataclass(frozen=True)
class TickSchedule:
    """Tick times of one asset, optionally with observed values."""

    asset_id: int
    times: np.ndarray
    values: Optional[np.ndarray] = None

    def __post_init__(self):
        times = np.ascontiguousarray(self.times, dtype=np.float64)
        if times.ndim != 1:
            raise InvalidInput("times must be one-dimensional")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise InvalidInput(f"asset {self.asset_id}: times must be strictly increasing")
        object.__setattr__(self, "times", times)
        if self.values is not None:
            values = np.ascontiguousarray(self.values, dtype=np.float64)
            if values.shape != times.shape:
                raise InvalidInput(f"asset {self.asset_id}: values and times differ in length")
            object.__setattr__(self, "values", values)

    def __len__(self):
        return self.times.size

    def with_values(self, values):
        return TickSchedule(self.asset_id, self.times, values)

    def check_horizon(self, horizon):
        if self.times.size and (self.times[0] < 0 or self.times[-1] > horizon):
            raise InvalidInput(f"asset {self.asset_id}: times outside [0, {horizon}]")


@dataclass(frozen=True)
class SyncGrid:
    """Refresh grid ``T_0 < T_1 < ...`` plus per-asset interpolated ticks.

    ``indices[k, p]`` points into asset ``k``'s original schedule, so
    ``taus[k, p]`` are copies of observed tick times (ties across assets
    are exact).
    """

    grid: np.ndarray
    indices: np.ndarray
    taus: np.ndarray
    horizon: float
    truncated: bool = False

    @property
    def n_assets(self):
        return self.indices.shape[0]

    @property
    def n_returns(self):
        return self.grid.size - 1

    def values(self, schedules):
        """Observed values at the interpolated times, shape ``(P + 1, d)``."""
        cols = []
        for k, sched in enumerate(schedules):
            if sched.values is None:
                raise InvalidInput(f"asset {sched.asset_id} has no values")
            cols.append(sched.values[self.indices[k]])
        return np.column_stack(cols)

    def check(self):
        """Assert condition [H](ii); raises ``InvalidInput`` on violation."""
        T = self.grid
        if np.any(np.diff(T) <= 0):
            raise InvalidInput("grid not strictly increasing")
        if np.any(self.taus[:, 0] > T[0]):
            raise InvalidInput("tau_0 exceeds T_0")
        if np.any(self.taus[:, 1:] <= T[None, :-1]) or np.any(self.taus[:, 1:] > T[None, 1:]):
            raise InvalidInput("T_{p-1} < tau_p <= T_p violated")


@dataclass(frozen=True)
class DurationStats:
    n: int
    N_t: int
    r_n: float
    mean_scaled_duration: float


@dataclass(frozen=True)
class HittingTimes:
    """Barrier-hitting schedule with the side of each exit (-1 down, +1 up)."""

    schedule: TickSchedule
    signs: np.ndarray
    coarse: bool = False
    steps_per_hit: float = field(default=float("nan"))


def _validate(schedules, horizon):
    if len(schedules) == 0:
        raise InvalidInput("need at least one schedule")
    for s in schedules:
        if len(s) == 0:
            raise InvalidInput(f"asset {s.asset_id} has an empty schedule")
        if horizon is not None:
            s.check_horizon(horizon)


def refresh_times(schedules: Sequence[TickSchedule], horizon: Optional[float] = None) -> np.ndarray:
    """All-refresh grid: ``T_0`` is the latest first tick, then each ``T_p``
    is the time by which every asset has ticked again after ``T_{p-1}``.

    Stops as soon as some asset has no tick after the current refresh time.

    >>> A = TickSchedule(0, [1.0, 3.0, 5.0]); B = TickSchedule(1, [2.0, 4.0, 6.0])
    >>> refresh_times([A, B], 10.0).tolist()
    [2.0, 4.0, 6.0]
    """
    _validate(schedules, horizon)
    times, offsets = _concat(schedules)
    grid, _ = _backend.refresh_scan(times, offsets)
    return grid


def _concat(schedules):
    lengths = np.array([len(s) for s in schedules], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
    times = np.ascontiguousarray(np.concatenate([s.times for s in schedules]))
    return times, offsets


def next_tick_interpolate(schedules: Sequence[TickSchedule], grid, horizon: Optional[float] = None) -> SyncGrid:
    """Interpolate each asset's next tick into ``grid``.

    ``tau[k, 0]`` is the first tick of asset ``k``; ``tau[k, p]`` is its
    first tick strictly after ``grid[p - 1]``. If some asset has no such
    tick, or it falls after ``grid[p]``, the grid is cut at the last fully
    covered index and ``truncated`` is set.
    """
    _validate(schedules, horizon)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise InvalidInput("empty grid")
    d = len(schedules)
    idx = np.zeros((d, grid.size), dtype=np.int64)
    last_ok = grid.size
    for k, s in enumerate(schedules):
        if s.times[0] > grid[0]:
            raise InvalidInput(f"asset {s.asset_id}: first tick after T_0")
        pos = np.searchsorted(s.times, grid[:-1], side="right")
        idx[k, 1:] = pos
        bad = pos >= len(s)
        safe = np.minimum(pos, len(s) - 1)
        bad |= s.times[safe] > grid[1:]
        if bad.any():
            last_ok = min(last_ok, int(np.argmax(bad)) + 1)
    truncated = last_ok < grid.size
    grid = grid[:last_ok]
    idx = idx[:, :last_ok]
    taus = np.vstack([s.times[idx[k]] for k, s in enumerate(schedules)])
    return SyncGrid(grid, idx, taus, float(horizon if horizon is not None else grid[-1]), truncated)


def synchronize(schedules: Sequence[TickSchedule], horizon: Optional[float] = None) -> SyncGrid:
    """Refresh times plus next-tick interpolation in one pass."""
    _validate(schedules, horizon)
    times, offsets = _concat(schedules)
    grid, idx = _backend.refresh_scan(times, offsets)
    taus = np.vstack([s.times[idx[k]] for k, s in enumerate(schedules)])
    return SyncGrid(grid, idx, taus, float(horizon if horizon is not None else grid[-1]))


def sample_equidistant(n: int, horizon: float = 1.0, asset_id: int = 0) -> TickSchedule:
    """Times ``i / n * horizon`` for ``i = 0..n``."""
    if n < 1:
        raise InvalidInput("n must be >= 1")
    return TickSchedule(asset_id, np.arange(n + 1) / n * horizon)


def sample_poisson(intensities, n: int, horizon: float, rng) -> list:
    """Independent Poisson arrivals with rate ``n * p_k`` for each asset."""
    out = []
    for k, p in enumerate(intensities):
        if p <= 0:
            raise InvalidInput("intensities must be positive")
        rate = n * p
        mean = rate * horizon
        size = int(mean + 6.0 * np.sqrt(mean) + 16)
        t = np.cumsum(rng.exponential(1.0 / rate, size))
        while t[-1] <= horizon:
            more = t[-1] + np.cumsum(rng.exponential(1.0 / rate, size))
            t = np.concatenate([t, more])
        out.append(TickSchedule(k, t[t <= horizon]))
    return out


def poisson_G_limit(intensities) -> float:
    r"""Limit of the scaled refresh duration for independent Poisson ticks.

    .. math::
        G = \sum_{k=1}^{d} \sum_{l_1<\dots<l_k} \frac{(-1)^{k-1}}{p_{l_1}+\dots+p_{l_k}}
    """
    p = [float(x) for x in intensities]
    if not p:
        raise InvalidInput("need at least one intensity")
    if any(x <= 0 for x in p):
        raise InvalidInput("intensities must be positive")
    total = 0.0
    for k in range(1, len(p) + 1):
        sign = 1.0 if k % 2 else -1.0
        total += sign * sum(1.0 / sum(c) for c in combinations(p, k))
    return total


def sample_hitting_barriers(alpha, beta, n, times, martingale, horizon=None,
                            step_variance=None, rng=None, bridge=True, asset_id=0) -> HittingTimes:
    """Times at which a fine-grid martingale path leaves a band around its last hit.

    ``t_0 = times[0]``; ``t_{i+1}`` is the first grid time after ``t_i``
    with ``M - M(t_i) <= -alpha/sqrt(n)`` or ``>= beta/sqrt(n)``.

    With ``bridge=True`` an exit between two grid points is also
    detected, with the Brownian-bridge crossing probability given the
    endpoints and the per-step variance ``step_variance``; the hit is
    dated at the right grid point. This removes the discrete-monitoring
    overshoot that otherwise inflates durations by ``O(sqrt(h) * sqrt(n))``.
    Without ``step_variance`` a constant per-step variance is estimated
    from the squared increments.
    """
    if alpha <= 0 or beta <= 0:
        raise InvalidInput("alpha and beta must be positive")
    times = np.ascontiguousarray(times, dtype=np.float64)
    path = np.ascontiguousarray(martingale, dtype=np.float64)
    if path.shape != times.shape:
        raise InvalidInput("times and martingale values differ in shape")
    if horizon is not None:
        keep = times <= horizon
        times, path = times[keep], path[keep]
    m = path.size
    lower, upper = alpha / np.sqrt(n), beta / np.sqrt(n)
    if step_variance is None:
        step_variance = np.full(m - 1, np.mean(np.diff(path) ** 2))
    else:
        step_variance = np.ascontiguousarray(step_variance[: m - 1], dtype=np.float64)
    if bridge:
        if rng is None:
            rng = np.random.default_rng()
        uniforms = rng.random(m - 1)
    else:
        uniforms = np.empty(0)
    hits, signs = _backend.hitting_scan(path, step_variance, lower, upper, uniforms, bool(bridge))
    tick_times = np.concatenate([[times[0]], times[hits]])
    steps_per_hit = (m - 1) / max(len(hits), 1)
    return HittingTimes(TickSchedule(asset_id, tick_times), np.asarray(signs),
                        coarse=steps_per_hit < 10, steps_per_hit=steps_per_hit)


def duration_stats(grid, n: int, t: float) -> DurationStats:
    """``N_t = max{p : T_p <= t}``, ``r_n = sup_p (T_p ^ t - T_{p-1} ^ t)`` with ``T_{-1} = 0``."""
    grid = np.asarray(grid, dtype=np.float64)
    below = np.searchsorted(grid, t, side="right")
    N_t = max(int(below) - 1, 0)
    clipped = np.minimum(np.concatenate([[0.0], grid]), t)
    r_n = float(np.max(np.diff(clipped))) if grid.size else 0.0
    if N_t >= 1:
        mean_scaled = float(n * np.mean(np.diff(grid[: N_t + 1])))
    else:
        mean_scaled = float("nan")
    return DurationStats(n, N_t, r_n, mean_scaled)


def long_run_variation(grid, n: int, m: int, t: float) -> float:
    r"""Long-run variation of time

    .. math::
        \mathfrak{S}_{n,m}(t) = \frac{n}{m}\sum_{p=1}^{N_t}(T_p-T_{p-1})
        \sum_{q=1}^{m\wedge p}(T_{p-q+1}-T_{p-q})
    """
    if m < 1:
        raise InvalidInput("m must be >= 1")
    grid = np.asarray(grid, dtype=np.float64)
    N_t = duration_stats(grid, n, t).N_t
    D = np.diff(grid[: N_t + 1])
    csum = np.concatenate([[0.0], np.cumsum(D)])
    p = np.arange(1, N_t + 1)
    window = csum[p] - csum[np.maximum(p - m, 0)]
    return float(n / m * np.sum(D * window))
