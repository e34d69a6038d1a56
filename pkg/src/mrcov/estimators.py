r"""Modulated realized covariance (MRC) and related estimators.

Given synchronized observations ``V_0, ..., V_N`` (rows, one column per
asset) and a window ``k_n``, the estimator is

.. math::
    \mathrm{MRC} = \frac{1}{\psi_2 k_n}\sum_i \bar Y_i \bar Y_i^*
    - \frac{\psi_1}{2\psi_2 k_n^2}\sum_{p=1}^{N}\Delta_p Y (\Delta_p Y)^*.

Bounded weights pre-average raw returns; weights with unbounded support
pre-average jittered returns, whose end points are averages of the first
and last ``k_n`` observations.
"""
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid

from . import _backend
from .errors import InvalidInput
from .timegrid import TickSchedule, long_run_variation, synchronize
from .weights import WeightSpec, discretize, make_double_exponential, window_size


@dataclass(frozen=True)
class PreAveraged:
    """Pre-averaged vectors ``blocks[j]`` for block indices ``index[j]``."""

    index: np.ndarray
    blocks: np.ndarray
    construction: str


@dataclass
class EstimateReport:
    estimate: np.ndarray
    bias_correction: np.ndarray
    N_T: int
    k_n: int
    theta: float
    weight: str
    construction: str
    stderr: Optional[np.ndarray] = None
    z: Optional[np.ndarray] = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        out = {}
        for key, val in asdict(self).items():
            out[key] = val.tolist() if isinstance(val, np.ndarray) else val
        return out


@dataclass(frozen=True)
class JumpDecomposition:
    iv: float
    jv: float
    qv: float
    rho: float
    exceed: int
    blocks: int
    k_n: int
    N_T: int
    c: float
    w: float

    def to_dict(self):
        return asdict(self)


# -- data plumbing ------------------------------------------------------------

def synchronized_values(data, horizon=None):
    """Return ``(V, grid)`` with ``V`` of shape ``(N + 1, d)``.

    ``data`` is a :class:`TickSchedule` with values, a list of them, or an
    array of already synchronized values (``grid`` is then ``None``).
    """
    if isinstance(data, TickSchedule):
        data = [data]
    if isinstance(data, (list, tuple)) and data and isinstance(data[0], TickSchedule):
        sync = synchronize(data, horizon)
        return sync.values(data), sync
    V = np.asarray(data, dtype=np.float64)
    if V.ndim == 1:
        V = V[:, None]
    if V.ndim != 2:
        raise InvalidInput("values must be one- or two-dimensional")
    return V, None


def realized_covariance(V):
    """``[Y, Y] = sum_p dY dY^*`` from synchronized values."""
    dV = np.diff(_as2d(V), axis=0)
    return dV.T @ dV


def _as2d(V):
    V = np.asarray(V, dtype=np.float64)
    return V[:, None] if V.ndim == 1 else V


# -- pre-averaging ------------------------------------------------------------

def preaverage_bounded(V, spec: WeightSpec, k_n: int) -> PreAveraged:
    r"""``\bar Y_i = sum_{p=1}^{k_n-1} g(p/k_n) (V_{i+p} - V_{i+p-1})``, ``i = 0..N-k_n+1``.

    >>> from mrcov.weights import make_tent
    >>> preaverage_bounded([0., 1., 0., 1., 0.], make_tent(), 4).blocks[:, 0].tolist()
    [0.0, 0.0]
    """
    if not spec.bounded:
        raise InvalidInput("preaverage_bounded needs a bounded-support weight")
    V = _as2d(V)
    N = V.shape[0] - 1
    if k_n < 2 or N < k_n:
        raise InvalidInput(f"need N_T >= k_n >= 2 (N_T={N}, k_n={k_n})")
    dV = np.ascontiguousarray(np.diff(V, axis=0))
    w = np.ascontiguousarray(spec.g(np.arange(1, k_n) / k_n))
    n_out = N - k_n + 2
    blocks = _backend.window_sum(dV, w, 0, n_out)
    return PreAveraged(np.arange(n_out), blocks, "bounded")


def jitter(V, k_n: int) -> np.ndarray:
    """Adjusted returns for ``p = k_n..N - k_n + 1`` (rows of the result).

    The first and last returns run from / to the means of the first and
    last ``k_n`` observations; the others are plain differences.
    """
    V = _as2d(V)
    N = V.shape[0] - 1
    if k_n < 1 or N < 2 * k_n + 1:
        raise InvalidInput(f"jittering needs N_T >= 2 k_n + 1 (N_T={N}, k_n={k_n})")
    head = V[:k_n].mean(axis=0)
    tail = V[N - k_n + 1:].mean(axis=0)
    inner = V[k_n:N - k_n + 1]
    pts = np.vstack([head, inner, tail])
    return np.ascontiguousarray(np.diff(pts, axis=0))


def preaverage_jittered(adjusted, spec: WeightSpec, k_n: int, tolerance: float = 1e-12) -> PreAveraged:
    r"""``\tilde Y_i = sum_p g((p - i)/k_n) \tilde\Delta_p`` for ``i = k_n..N - k_n + 1``.

    ``adjusted`` holds the jittered returns in order, so row ``m``
    corresponds to ``p = k_n + m``. Weights below ``tolerance`` are dropped.
    """
    A = np.ascontiguousarray(_as2d(adjusted))
    dw = discretize(spec, k_n, tolerance)
    blocks = _backend.window_sum(A, np.ascontiguousarray(dw.samples), int(dw.offsets[0]), A.shape[0])
    return PreAveraged(np.arange(k_n, k_n + A.shape[0]), blocks, "jittered")


def _blocks(V, spec, k_n, construction):
    if construction == "auto":
        construction = "bounded" if spec.bounded else "jittered"
    if construction == "bounded":
        return preaverage_bounded(V, spec, k_n)
    if construction == "jittered":
        return preaverage_jittered(jitter(V, k_n), spec, k_n)
    raise InvalidInput(f"unknown construction {construction!r}")


def _combine(blocks, RV, spec, k_n):
    psi1, psi2 = spec.psi1, spec.psi2
    main = blocks.T @ blocks / (psi2 * k_n)
    bias = psi1 / (2.0 * psi2 * k_n ** 2) * RV
    return main - bias, bias


def mrc_values(V, spec: WeightSpec, k_n: int, construction: str = "auto"):
    """MRC from synchronized values. Returns ``(estimate, bias, construction)``."""
    V = _as2d(V)
    pa = _blocks(V, spec, k_n, construction)
    est, bias = _combine(pa.blocks, realized_covariance(V), spec, k_n)
    return est, bias, pa.construction


def mrc(data, spec: WeightSpec, theta: float, horizon=None, construction: str = "auto",
        k_n: Optional[int] = None, diagnostics: bool = False) -> EstimateReport:
    """Synchronize, pick ``k_n = round(theta sqrt(N_T))`` and compute the MRC.

    ``construction`` is ``"bounded"``, ``"jittered"`` or ``"auto"`` (bounded
    for bounded-support weights, jittered otherwise).
    """
    V, sync = synchronized_values(data, horizon)
    N = V.shape[0] - 1
    if N < 2:
        raise InvalidInput("not enough observations")
    k = k_n if k_n is not None else window_size(theta, N)
    est, bias, used = mrc_values(V, spec, k, construction)
    diag = {}
    if diagnostics and sync is not None:
        diag["long_run_variation"] = long_run_variation(sync.grid, N, k, sync.grid[-1])
    return EstimateReport(est, bias, N, k, float(theta), spec.name, used, diagnostics=diag)


def mrc_fast_exponential(data, rate: float, theta: float, horizon=None,
                         k_n: Optional[int] = None) -> EstimateReport:
    r"""Jittered MRC with ``g(x) = exp(-rate |x|)`` in ``O(N)``.

    Two geometric recursions, forward and backward with factor
    ``exp(-rate / k_n)``, give ``\tilde Y_i = y^+_i + y^-_i - \tilde\Delta_i``.
    """
    spec = make_double_exponential(rate)
    V, _ = synchronized_values(data, horizon)
    N = V.shape[0] - 1
    k = k_n if k_n is not None else window_size(theta, N)
    A = jitter(V, k)
    blocks = _backend.exp_two_sided(A, math.exp(-rate / k))
    est, bias = _combine(blocks, realized_covariance(V), spec, k)
    return EstimateReport(est, bias, N, k, float(theta), spec.name, "jittered-fast")


# -- realized kernel ------------------------------------------------------------

def autocovariances(returns, max_lag=None):
    """``gamma_h = sum_j x_j x_{j-h}`` for ``h = 0..max_lag`` via FFT."""
    x = np.asarray(returns, dtype=np.float64)
    L = x.size
    max_lag = L - 1 if max_lag is None else min(max_lag, L - 1)
    size = 1 << int(2 * L - 1).bit_length()
    f = np.fft.rfft(x, size)
    ac = np.fft.irfft(f * np.conj(f), size)[: max_lag + 1]
    return ac


def realized_kernel(returns, K, H: float) -> float:
    r"""Flat-top realized kernel ``gamma_0 + sum_{h>=1} K((h-1)/H) (gamma_h + gamma_{-h})``."""
    if not H >= 1:
        raise InvalidInput("bandwidth H must be >= 1")
    x = np.asarray(returns, dtype=np.float64)
    if x.size == 0:
        return 0.0
    ac = autocovariances(x)
    h = np.arange(1, ac.size)
    kw = np.asarray(K((h - 1) / H), dtype=np.float64)
    return float(ac[0] + 2.0 * np.dot(kw, ac[1:]))


# -- asymptotic variance ----------------------------------------------------------

def _path(a, m, d):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 0:
        return np.broadcast_to(a, (m, d, d))
    if a.ndim == 1:
        return a.reshape(m, 1, 1)
    if a.ndim == 2:
        return np.broadcast_to(a, (m, d, d))
    return a


def oracle_avar(Sigma, Upsilon, chi, G, spec: WeightSpec, theta: float, t_grid=None):
    r"""Asymptotic covariance tensor ``A[k, l, k', l']`` of ``n^{1/4}`` (MRC - [X, X]).

    ``Sigma`` and ``Upsilon`` are ``(d, d)`` constants or ``(m, d, d)``
    paths on ``t_grid``; ``chi`` is ``(d, d)`` or a path; ``G`` a positive
    scalar or an ``(m,)`` path. Constants are integrated over ``[0, 1]``
    unless ``t_grid`` is given; paths use the trapezoid rule.
    """
    t_grid = np.array([0.0, 1.0]) if t_grid is None else np.asarray(t_grid, dtype=np.float64)
    m = t_grid.size
    S = np.asarray(Sigma, dtype=np.float64)
    d = 1 if S.ndim <= 1 else S.shape[-1]
    S = _path(S, m, d)
    U = _path(Upsilon, m, d) * _path(chi, m, d)
    Gp = np.broadcast_to(np.asarray(G, dtype=np.float64), (m,))
    if np.any(Gp <= 0):
        raise InvalidInput("G must be positive")
    c = spec.constants
    th = float(theta)

    def pair(A, B):
        return np.einsum("tac,tbd->tabcd", A, B) + np.einsum("tad,tbc->tabcd", A, B)

    mixed = (np.einsum("tac,tbd->tabcd", S, U) + np.einsum("tbc,tad->tabcd", S, U)
             + np.einsum("tbd,tac->tabcd", S, U) + np.einsum("tad,tbc->tabcd", S, U))
    integrand = (c.Phi22 * th * pair(S, S) * Gp[:, None, None, None, None]
                 + c.Phi11 / th ** 3 * pair(U, U) / Gp[:, None, None, None, None]
                 + c.Phi12 / th * mixed)
    total = trapezoid(integrand, t_grid, axis=0) if m > 1 else integrand[0]
    return 2.0 / c.psi2 ** 2 * total


def studentize(estimate, truth, avar, n):
    """``z^{kl} = n^{1/4} (estimate - truth) / sqrt(avar^{klkl})``.

    Entries with zero asymptotic variance come back as NaN and are
    flagged in the returned mask.
    """
    est = np.atleast_2d(np.asarray(estimate, dtype=np.float64))
    tru = np.atleast_2d(np.asarray(truth, dtype=np.float64))
    d = est.shape[0]
    var = np.asarray(avar, dtype=np.float64).reshape(d, d, d, d)
    diag = np.einsum("klkl->kl", var)
    ok = diag > 0
    z = np.full((d, d), np.nan)
    z[ok] = n ** 0.25 * (est - tru)[ok] / np.sqrt(diag[ok])
    return z, ~ok


def v_C_v_J(spec: WeightSpec, theta, sigma, upsilon, jump_sum=0.0):
    r"""Closed-form asymptotic variances of the diffusive and jump parts.

    .. math::
        v_C^2 = \frac{4}{\psi_2^2}\left(\Phi_{22}\theta\sigma^4
            + 2\Phi_{12}\frac{\sigma^2\Upsilon}{\theta}
            + \Phi_{11}\frac{\Upsilon^2}{\theta^3}\right),\qquad
        v_J^2 = \frac{8}{\psi_2^2}\left(\Phi_{22}\theta\sigma^2
            + \Phi_{12}\frac{\Upsilon}{\theta}\right)\sum\gamma^2
    """
    if sigma < 0 or upsilon < 0:
        raise InvalidInput("sigma and upsilon must be nonnegative")
    c = spec.constants
    s2 = sigma * sigma
    vc = 4.0 / c.psi2 ** 2 * (c.Phi22 * theta * s2 * s2 + 2.0 * c.Phi12 * s2 * upsilon / theta
                              + c.Phi11 * upsilon ** 2 / theta ** 3)
    vj = 8.0 / c.psi2 ** 2 * (c.Phi22 * theta * s2 + c.Phi12 * upsilon / theta) * jump_sum
    return vc, vj


def oracle_theta(sigma, upsilon):
    """``sqrt(Upsilon) / sigma``, the efficient choice for the double-exponential weight."""
    if not sigma > 0:
        raise InvalidInput("oracle theta needs sigma > 0")
    return math.sqrt(upsilon) / sigma


# -- jumps ------------------------------------------------------------------------

def default_threshold_constant(specs, k_n, n, sigma, upsilon, w, multiple=5.0):
    """``c`` such that ``rho_n = c n^{-w}`` is ``multiple`` block standard deviations.

    With several weights the largest standard deviation is used.
    """
    sd = max(math.sqrt(s.psi1 * upsilon / k_n + s.psi2 * k_n * sigma ** 2 / n) for s in specs)
    return multiple * sd * n ** w


def threshold_estimators(data, spec_iv: WeightSpec, spec_jv: WeightSpec, c: float, w: float,
                         theta: float, horizon=None, k_n: Optional[int] = None) -> JumpDecomposition:
    r"""Split the pre-averaged blocks at ``rho_n = c n^{-w}``.

    ``IV`` keeps blocks with ``|\tilde Y| <= rho_n`` (weight ``spec_iv``) and
    subtracts the MRC bias term; ``JV`` keeps blocks with
    ``|\tilde Y| > rho_n`` (weight ``spec_jv``). Univariate.
    """
    if not 0.125 < w < 0.25:
        raise InvalidInput("w must lie in (1/8, 1/4)")
    if not c > 0:
        raise InvalidInput("c must be positive")
    V, _ = synchronized_values(data, horizon)
    if V.shape[1] != 1:
        raise InvalidInput("threshold estimators are univariate")
    N = V.shape[0] - 1
    k = k_n if k_n is not None else window_size(theta, N)
    rho = c * N ** (-w)
    RV = float(realized_covariance(V)[0, 0])

    b1 = _blocks(V, spec_iv, k, "auto").blocks[:, 0]
    keep = np.abs(b1) <= rho
    iv = float(np.dot(b1[keep], b1[keep])) / (spec_iv.psi2 * k) \
        - spec_iv.psi1 / (2.0 * spec_iv.psi2 * k ** 2) * RV

    b2 = _blocks(V, spec_jv, k, "auto").blocks[:, 0]
    big = np.abs(b2) > rho
    jv = float(np.dot(b2[big], b2[big])) / (spec_jv.psi2 * k)
    return JumpDecomposition(iv, jv, iv + jv, rho, int(big.sum()), int(b2.size), k, N, float(c), float(w))


# -- tricity ----------------------------------------------------------------------

def tricity(X, spec: WeightSpec, k_n: int, n: float) -> float:
    r"""``sqrt(n) / k_n^{3/2} sum_i \tilde X_i^3`` over jittered latent blocks (univariate)."""
    X = _as2d(X)
    if X.shape[1] != 1:
        raise InvalidInput("tricity is univariate")
    b = preaverage_jittered(jitter(X, k_n), spec, k_n).blocks[:, 0]
    return float(math.sqrt(n) / k_n ** 1.5 * np.sum(b ** 3))
