"""Latent price paths, microstructure noise and observed tick series.

The latent log-price is ``X_t = X_0 + int a ds + int sigma dW`` with
spot covariance ``Sigma_s = v_s * C``: ``C`` is a constant base
covariance and ``v_s`` is either 1 or a CIR (Heston-type) variance
factor. Observations are ``Y = X + eps`` (plus a jump process ``J``
when a :class:`JumpModel` is supplied).
"""
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import InvalidInput, InvalidModel
from .timegrid import SyncGrid, TickSchedule, sample_hitting_barriers


@dataclass(frozen=True)
class HestonParams:
    """CIR variance factor ``dv = kappa (mean - v) dt + xi sqrt(v) dB``.

    ``rho`` is the correlation between ``B`` and the first price driver.
    """

    kappa: float
    mean: float
    xi: float
    v0: float
    rho: float = 0.0


@dataclass(frozen=True)
class PathModel:
    cov: np.ndarray
    drift: Optional[np.ndarray] = None
    heston: Optional[HestonParams] = None

    def __post_init__(self):
        cov = np.atleast_2d(np.asarray(self.cov, dtype=np.float64))
        if cov.shape[0] != cov.shape[1]:
            raise InvalidModel("covariance must be square")
        if not np.allclose(cov, cov.T):
            raise InvalidModel("covariance must be symmetric")
        if np.linalg.eigvalsh(cov).min() < -1e-12 * max(1.0, np.abs(cov).max()):
            raise InvalidModel("covariance is not positive semidefinite")
        object.__setattr__(self, "cov", cov)
        drift = np.zeros(cov.shape[0]) if self.drift is None else np.broadcast_to(
            np.asarray(self.drift, dtype=np.float64), (cov.shape[0],)).copy()
        object.__setattr__(self, "drift", drift)
        h = self.heston
        if h is not None and (h.kappa < 0 or h.mean < 0 or h.xi < 0 or h.v0 < 0 or abs(h.rho) > 1):
            raise InvalidModel("invalid Heston parameters")

    @property
    def dim(self):
        return self.cov.shape[0]

    @classmethod
    def constant(cls, sigma=1.0, dim=1, corr=0.0):
        """Constant volatility ``sigma`` per asset with common correlation ``corr``."""
        sig = np.broadcast_to(np.asarray(sigma, dtype=np.float64), (dim,))
        R = np.full((dim, dim), corr)
        np.fill_diagonal(R, 1.0)
        return cls(np.outer(sig, sig) * R)


@dataclass(frozen=True)
class NoiseModel:
    """Centered Gaussian noise with covariance ``Upsilon(t)`` (matrix or callable)."""

    cov: Union[np.ndarray, Callable[[float], np.ndarray]]

    def at(self, t):
        if callable(self.cov):
            return np.atleast_2d(np.asarray(self.cov(t), dtype=np.float64))
        return np.atleast_2d(np.asarray(self.cov, dtype=np.float64))

    @classmethod
    def scalar(cls, variance, dim=1):
        return cls(variance * np.eye(dim))


@dataclass(frozen=True)
class JumpModel:
    """Jumps of size ``sizes[k]`` (scalar or d-vector) at times ``times[k]`` in (0, 1)."""

    times: np.ndarray
    sizes: np.ndarray

    def __post_init__(self):
        times = np.atleast_1d(np.asarray(self.times, dtype=np.float64))
        sizes = np.asarray(self.sizes, dtype=np.float64)
        if sizes.ndim == 0:
            sizes = sizes[None]
        if len(times) != len(sizes):
            raise InvalidModel("jump times and sizes differ in length")
        if len(times) and (times[0] <= 0 or times[-1] >= 1 or np.any(np.diff(times) <= 0)):
            raise InvalidModel("jump times must be strictly increasing inside (0, 1)")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def poisson(cls, intensity, size_sd, rng, horizon=1.0):
        k = rng.poisson(intensity * horizon)
        times = np.sort(rng.uniform(0.0, horizon, k))
        return cls(times, rng.normal(0.0, size_sd, k))

    def sum_squares(self, asset=0):
        s = self.sizes if self.sizes.ndim == 1 else self.sizes[:, asset]
        return float(np.sum(s ** 2))

    def cumulative(self, t, dim):
        """``J_t`` at times ``t``, shape ``(len(t), dim)``."""
        t = np.asarray(t, dtype=np.float64)
        sizes = self.sizes.reshape(len(self.times), -1)
        sizes = np.broadcast_to(sizes, (len(self.times), dim))
        out = np.zeros((t.size, dim))
        for s, g in zip(self.times, sizes):
            out[t >= s] += g
        return out


@dataclass(frozen=True)
class LatentPath:
    """A simulated latent path on a fine grid.

    ``scale[j]`` is the variance factor on step ``j`` (spot covariance
    ``scale[j] * base_cov``) and ``integrated[j]`` its integral up to
    ``times[j]``, so ``[X, X]_t = integrated * base_cov``.
    """

    times: np.ndarray
    X: np.ndarray
    martingale: np.ndarray
    scale: np.ndarray
    integrated: np.ndarray
    base_cov: np.ndarray

    @property
    def dim(self):
        return self.X.shape[1]

    @property
    def quadratic_variation(self):
        return self.integrated[-1] * self.base_cov

    def qv_at(self, t):
        """``[X, X]_t`` with linear interpolation between grid times."""
        return float(np.interp(t, self.times, self.integrated)) * self.base_cov

    def qv_between(self, s, t):
        return self.qv_at(t) - self.qv_at(s)

    def spot_cov(self, j):
        return self.scale[j] * self.base_cov

    def step_variance(self, asset=0):
        return self.scale * np.diff(self.times) * self.base_cov[asset, asset]

    def values_at(self, t, asset=None):
        """Latent values at the last grid time at or before each ``t``."""
        idx = self.index_at(t)
        return self.X[idx] if asset is None else self.X[idx, asset]

    def index_at(self, t):
        t = np.asarray(t, dtype=np.float64)
        idx = np.searchsorted(self.times, t, side="right") - 1
        return np.clip(idx, 0, self.times.size - 1)


def simulate_path(model: PathModel, fine_steps: int = 0, horizon: float = 1.0, rng=None,
                  times=None, x0=None) -> LatentPath:
    """Euler-Maruyama realization on a uniform fine grid (or on ``times``).

    With constant volatility the scheme is exact on any grid, so passing
    the union of tick times avoids the fine grid altogether.
    """
    if rng is None:
        rng = np.random.default_rng()
    if times is None:
        if fine_steps < 1000:
            raise InvalidInput("fine_steps must be >= 1000")
        times = np.linspace(0.0, horizon, fine_steps + 1)
    else:
        times = np.ascontiguousarray(times, dtype=np.float64)
        if times.size < 2 or np.any(np.diff(times) <= 0):
            raise InvalidInput("times must be strictly increasing with at least two points")
    d = model.dim
    dt = np.diff(times)
    m = dt.size
    L = _psd_sqrt(model.cov)
    z = rng.standard_normal((m, d))
    if model.heston is None:
        scale = np.ones(m)
    else:
        scale = _cir_path(model.heston, dt, z[:, 0], rng)
    incr = (z @ L.T) * np.sqrt(scale * dt)[:, None]
    M = np.zeros((m + 1, d))
    np.cumsum(incr, axis=0, out=M[1:])
    start = np.zeros(d) if x0 is None else np.asarray(x0, dtype=np.float64)
    drift_part = (times - times[0])[:, None] * model.drift[None, :]
    X = start + M + drift_part if np.any(model.drift) or np.any(start) else M
    integrated = np.concatenate([[0.0], np.cumsum(scale * dt)])
    return LatentPath(times, X, M, scale, integrated, model.cov)


def _psd_sqrt(cov):
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        w, V = np.linalg.eigh(cov)
        if w.min() < -1e-12 * max(1.0, abs(w).max()):
            raise InvalidModel("covariance is not positive semidefinite")
        return V * np.sqrt(np.clip(w, 0.0, None))


def _cir_path(h: HestonParams, dt, z_price, rng):
    """Full-truncation Euler for the variance factor; returns ``v`` on each step's left end."""
    m = dt.size
    zb = h.rho * z_price + np.sqrt(1.0 - h.rho ** 2) * rng.standard_normal(m)
    v = np.empty(m)
    cur = h.v0
    sq = np.sqrt(dt)
    for j in range(m):
        vp = cur if cur > 0.0 else 0.0
        v[j] = vp
        cur = cur + h.kappa * (h.mean - vp) * dt[j] + h.xi * np.sqrt(vp) * sq[j] * zb[j]
    return v


def observe(path: LatentPath, schedule, noise: NoiseModel, jumps: Optional[JumpModel] = None,
            rng=None):
    """Noisy observations ``X + eps (+ J)`` at tick times.

    ``schedule`` may be one :class:`TickSchedule`, a list of them (asset
    ``k`` reads component ``asset_id``) or a :class:`SyncGrid`. Noise at
    a time shared by several assets is drawn jointly from ``Upsilon``.
    """
    if rng is None:
        rng = np.random.default_rng()
    single = isinstance(schedule, TickSchedule)
    if isinstance(schedule, SyncGrid):
        schedules = [TickSchedule(k, schedule.taus[k]) for k in range(schedule.n_assets)]
    else:
        schedules = [schedule] if single else list(schedule)
    d = path.dim
    for s in schedules:
        if len(s) and (s.times[0] < path.times[0] or s.times[-1] > path.times[-1] + 1e-12):
            raise InvalidInput("tick times outside the simulated horizon")
        if not 0 <= s.asset_id < d:
            raise InvalidInput(f"asset_id {s.asset_id} outside path dimension {d}")
    all_times = np.unique(np.concatenate([s.times for s in schedules]))
    eps = _draw_noise(noise, all_times, d, rng)
    out = []
    for s in schedules:
        k = s.asset_id
        vals = path.values_at(s.times, k)
        vals = vals + eps[np.searchsorted(all_times, s.times), k]
        if jumps is not None and len(jumps.times):
            vals = vals + jumps.cumulative(s.times, d)[:, k]
        out.append(s.with_values(vals))
    return out[0] if single else out


def _draw_noise(noise, times, d, rng):
    z = rng.standard_normal((times.size, d))
    if callable(noise.cov):
        eps = np.empty((times.size, d))
        for i, t in enumerate(times):
            eps[i] = _psd_sqrt(_full(noise.at(t), d)) @ z[i]
        return eps
    U = _full(noise.at(0.0), d)
    if not np.any(U):
        return np.zeros((times.size, d))
    return z @ _psd_sqrt(U).T


def _full(U, d):
    if U.size == 1:
        return U.item() * np.eye(d)
    if U.shape != (d, d):
        raise InvalidModel(f"noise covariance must be {d}x{d}")
    return U


def hitting_observation_times(path: LatentPath, alpha, beta, n, rng=None, bridge=True):
    """Endogenous barrier-hitting ticks driven by this path's own martingale part."""
    if path.dim != 1:
        raise InvalidInput("barrier-hitting schemes are univariate")
    return sample_hitting_barriers(alpha, beta, n, path.times, path.martingale[:, 0],
                                   step_variance=path.step_variance(0), rng=rng, bridge=bridge)


def replication_rngs(seed, count):
    """Independent generators for ``count`` replications of master ``seed``.

    Replication ``r`` always gets ``SeedSequence(seed, spawn_key=(r,))``,
    so its stream does not depend on how replications are scheduled.
    """
    return [replication_rng(seed, r) for r in range(count)]


def replication_rng(seed, r, stream=None):
    """Generator for replication ``r``; ``stream`` adds a leading spawn key (e.g. per sample size)."""
    key = (int(r),) if stream is None else (int(stream), int(r))
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=key))
