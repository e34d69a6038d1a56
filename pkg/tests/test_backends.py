import numpy as np
import pytest

from mrcov import _backend

IMPLS = _backend.implementations()
pytestmark = pytest.mark.skipif("cython" not in IMPLS, reason="compiled kernels not built")


def test_refresh_scan(rng):
    series = [np.sort(rng.uniform(0, 1, m)) for m in (300, 500, 40)]
    times = np.concatenate(series)
    offsets = np.cumsum([0] + [s.size for s in series])
    g1, i1 = IMPLS["python"].refresh_scan(times, offsets)
    g2, i2 = IMPLS["cython"].refresh_scan(times, offsets)
    np.testing.assert_array_equal(g1, g2)
    np.testing.assert_array_equal(i1, i2)


@pytest.mark.parametrize("bridge", [False, True])
def test_hitting_scan(rng, bridge):
    m = 100_000
    path = np.concatenate([[0.0], np.cumsum(rng.normal(0, 0.01, m))])
    var = np.full(m, 1e-4)
    u = rng.uniform(size=m)
    a = IMPLS["python"].hitting_scan(path, var, 0.1, 0.05, u, bridge)
    b = IMPLS["cython"].hitting_scan(path, var, 0.1, 0.05, u, bridge)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(np.asarray(x), np.asarray(y))


def test_exp_two_sided(rng):
    x = rng.normal(size=(5000, 2))
    np.testing.assert_allclose(IMPLS["python"].exp_two_sided(x, 0.93), IMPLS["cython"].exp_two_sided(x, 0.93),
                               rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("shift", [-40, 0, 1])
def test_window_sum(rng, shift):
    x = rng.normal(size=(1000, 3))
    w = rng.normal(size=81)
    n_out = 1000 - max(0, shift + 80) if shift >= 0 else 1000
    np.testing.assert_allclose(IMPLS["python"].window_sum(x, w, shift, n_out),
                               IMPLS["cython"].window_sum(x, w, shift, n_out), rtol=1e-12, atol=1e-12)


def test_tridiagonal_solve(rng):
    n = 500
    sub, sup = rng.uniform(-1, 0, n - 1), rng.uniform(-1, 0, n - 1)
    diag = 3.0 + rng.uniform(size=n)
    rhs = rng.normal(size=n)
    np.testing.assert_allclose(IMPLS["python"].tridiagonal_solve(sub, diag, sup, rhs),
                               IMPLS["cython"].tridiagonal_solve(sub, diag, sup, rhs), rtol=1e-11)
