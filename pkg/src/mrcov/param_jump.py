r"""Parametric jump model with known volatility and noise level.

Observations are ``z_i = sigma W_{i/n} + sum_k gamma_k 1{S_k <= i/n} + eps_i``
for ``i = 1..n`` with i.i.d. ``eps_i ~ N(0, Upsilon)``. The differenced
data ``D_n z`` are Gaussian with the tridiagonal MA(1)-type covariance

.. math::
    V_n = \begin{pmatrix}
        \sigma^2/n + \Upsilon & -\Upsilon & & \\
        -\Upsilon & \sigma^2/n + 2\Upsilon & \ddots & \\
        & \ddots & \ddots & -\Upsilon \\
        & & -\Upsilon & \sigma^2/n + 2\Upsilon
    \end{pmatrix},

whose eigenpairs are explicit. Everything here is ``O(n)``.
"""
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _backend
from .errors import InvalidInput, InvalidModel, NumericFailure


@dataclass(frozen=True)
class Tridiagonal:
    """Banded matrix: ``sub[i]`` is entry ``(i + 1, i)``, ``sup[i]`` is ``(i, i + 1)``."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    @property
    def n(self):
        return self.diag.size

    def dense(self):
        return np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)

    def matvec(self, x):
        x = np.asarray(x, dtype=np.float64)
        y = self.diag * x
        y[1:] += self.sub * x[:-1]
        y[:-1] += self.sup * x[1:]
        return y

    def solve(self, rhs):
        try:
            return _backend.tridiagonal_solve(self.sub, self.diag, self.sup,
                                              np.ascontiguousarray(rhs, dtype=np.float64))
        except (ZeroDivisionError, np.linalg.LinAlgError) as exc:
            raise NumericFailure(f"singular tridiagonal system: {exc}") from exc


@dataclass(frozen=True)
class ParametricModel:
    n: int
    sigma: float
    upsilon: float
    jump_times: tuple = ()
    jump_sizes: tuple = ()

    def __post_init__(self):
        S = tuple(float(s) for s in self.jump_times)
        g = tuple(float(x) for x in self.jump_sizes) or (0.0,) * len(S)
        if self.n < 2:
            raise InvalidModel("n must be >= 2")
        if not self.upsilon > 0 or self.sigma < 0:
            raise InvalidModel("need Upsilon > 0 and sigma >= 0")
        if len(S) != len(g):
            raise InvalidModel("jump times and sizes differ in length")
        if S and (S[0] <= 0 or S[-1] >= 1 or any(b <= a for a, b in zip(S, S[1:]))):
            raise InvalidModel("jump times must be strictly increasing inside (0, 1)")
        object.__setattr__(self, "jump_times", S)
        object.__setattr__(self, "jump_sizes", g)

    @property
    def indices(self):
        """1-based ``i(k) = ceil(n S_k)``."""
        return jump_indices(self.n, self.jump_times)

    def simulate(self, rng):
        n = self.n
        W = np.cumsum(rng.standard_normal(n)) * (self.sigma / math.sqrt(n))
        z = W + rng.standard_normal(n) * math.sqrt(self.upsilon)
        for i, g in zip(self.indices, self.jump_sizes):
            z[i - 1:] += g
        return z


def jump_indices(n, jump_times):
    idx = np.array([int(math.ceil(n * s)) for s in jump_times], dtype=np.int64)
    if idx.size and (idx.min() < 1 or idx.max() > n):
        raise InvalidInput("jump index outside 1..n")
    return idx


def build_matrices(n: int, sigma: float, upsilon: float):
    """``(D_n, V_n)`` as :class:`Tridiagonal` forms.

    >>> D, V = build_matrices(2, 1.0, 1.0)
    >>> V.dense().tolist()
    [[1.5, -1.0], [-1.0, 2.5]]
    """
    if n < 2:
        raise InvalidInput("n must be >= 2")
    D = Tridiagonal(-np.ones(n - 1), np.ones(n), np.zeros(n - 1))
    diag = np.full(n, sigma ** 2 / n + 2.0 * upsilon)
    diag[0] = sigma ** 2 / n + upsilon
    off = np.full(n - 1, -float(upsilon))
    return D, Tridiagonal(off, diag, off.copy())


def eigenvalues(n: int, sigma: float, upsilon: float):
    r"""``lambda_i = sigma^2/n + 4 Upsilon sin^2((pi/2)(2i - 1)/(2n + 1))``, increasing in ``i``."""
    i = np.arange(1, n + 1)
    return sigma ** 2 / n + 4.0 * upsilon * np.sin(0.5 * math.pi * (2 * i - 1) / (2 * n + 1)) ** 2


def eigenvector_entry(n, i, j):
    """``U^{ij} = 2/sqrt(2n+1) cos(2 pi (i - 1/2)(j - 1/2) / (2n + 1))`` (1-based, broadcasting)."""
    i = np.asarray(i, dtype=np.float64)
    j = np.asarray(j, dtype=np.float64)
    return 2.0 / math.sqrt(2 * n + 1) * np.cos(2.0 * math.pi * (i - 0.5) * (j - 0.5) / (2 * n + 1))


def eigenpairs(n: int, sigma: float, upsilon: float):
    """Eigenvalues and the (symmetric, orthogonal) eigenvector matrix of ``V_n``."""
    if n < 2:
        raise InvalidInput("n must be >= 2")
    idx = np.arange(1, n + 1)
    return eigenvalues(n, sigma, upsilon), eigenvector_entry(n, idx[:, None], idx[None, :])


def fisher_entry(n: int, sigma: float, upsilon: float, k: int, l: int, jump_times: Sequence[float]) -> float:
    """``n^{-1/2} sum_j U^{i(k) j} U^{i(l) j} / lambda_j`` for 0-based jump labels ``k, l``."""
    idx = jump_indices(n, jump_times)
    j = np.arange(1, n + 1)
    lam = eigenvalues(n, sigma, upsilon)
    uk = eigenvector_entry(n, idx[k], j)
    ul = eigenvector_entry(n, idx[l], j)
    return float(np.sum(uk * ul / lam) / math.sqrt(n))


def fisher_entry_direct(n, sigma, upsilon, k, l, jump_times) -> float:
    """Same quantity as ``n^{-1/2} e_{i(k)}^T V_n^{-1} e_{i(l)}`` via a tridiagonal solve."""
    idx = jump_indices(n, jump_times)
    _, V = build_matrices(n, sigma, upsilon)
    e = np.zeros(n)
    e[idx[l] - 1] = 1.0
    return float(V.solve(e)[idx[k] - 1] / math.sqrt(n))


def jump_mle(z, sigma: float, upsilon: float, jump_times: Sequence[float]) -> np.ndarray:
    r"""Jump sizes ``2 sigma sqrt(Upsilon) n^{-1/2} (V_n^{-1} D_n z)_{i(k)}``.

    Linear in ``z``; the asymptotic covariance of ``n^{1/4}`` times the
    error is ``2 sigma sqrt(Upsilon)`` times the identity.
    """
    if not upsilon > 0:
        raise InvalidModel("Upsilon must be positive")
    z = np.asarray(z, dtype=np.float64)
    n = z.size
    D, V = build_matrices(n, sigma, upsilon)
    x = V.solve(D.matvec(z))
    idx = jump_indices(n, jump_times)
    return 2.0 * sigma * math.sqrt(upsilon) / math.sqrt(n) * x[idx - 1]
