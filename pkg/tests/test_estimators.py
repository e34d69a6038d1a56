import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mrcov import estimators as E
from mrcov import weights as W
from mrcov.errors import InvalidInput
from mrcov.market_sim import (NoiseModel, PathModel, hitting_observation_times, observe, replication_rng,
                              simulate_path)
from mrcov.timegrid import sample_equidistant

TENT = W.make_tent()
DEXP = W.make_double_exponential()


def noisy_path(n, rng, sigma=1.0, ups=0.01, d=1):
    X = np.cumsum(rng.normal(0, sigma / math.sqrt(n), (n + 1, d)), axis=0)
    return X + rng.normal(0, math.sqrt(ups), X.shape)


def test_single_step_closed_form():
    V = np.r_[np.zeros(6), np.ones(6)]
    est, bias, used = E.mrc_values(V, TENT, 4)
    assert used == "bounded"
    # blocks pick up g(1/4), g(2/4), g(3/4) once each
    assert est[0, 0] == pytest.approx(0.375 / (4 / 12) - 1 / (2 * 16 / 12))
    assert bias[0, 0] == pytest.approx(0.375)


def test_constant_series_is_zero():
    for construction in ("bounded", "jittered"):
        est, _, _ = E.mrc_values(np.full(40, 3.0), TENT, 4, construction)
        assert est[0, 0] == 0.0


def test_jittered_interior_blocks_match_bounded(rng):
    V = noisy_path(200, rng)
    k = 6
    bounded = E.preaverage_bounded(V, TENT, k).blocks[:, 0]
    jit = E.preaverage_jittered(E.jitter(V, k), TENT, k)
    N = 200
    for i, b in zip(jit.index, jit.blocks[:, 0]):
        if i + 1 >= k + 1 and i + k - 1 <= N - k:
            assert b == pytest.approx(bounded[i], abs=1e-13)


def test_jitter_end_points():
    V = np.arange(11.0)
    A = E.jitter(V, 3)
    # head mean 1, first interior value 3; last interior 7, tail mean 9
    assert A[0, 0] == 2.0 and A[-1, 0] == 2.0 and A.shape[0] == 11 - 2 * 3 + 1
    with pytest.raises(InvalidInput):
        E.jitter(np.arange(6.0), 3)


def test_fast_matches_direct(rng):
    V = noisy_path(3000, rng, d=2)
    fast = E.mrc_fast_exponential(V, 1.0, 0.2).estimate
    direct = E.mrc(V, DEXP, 0.2).estimate
    np.testing.assert_allclose(fast, direct, rtol=1e-10)


@given(st.floats(0.1, 10.0))
def test_scale_equivariance(c):
    V = noisy_path(400, np.random.default_rng(7), d=2)
    a = E.mrc(V, TENT, 0.3).estimate
    b = E.mrc(c * V, TENT, 0.3).estimate
    np.testing.assert_allclose(b, c * c * a, rtol=1e-10, atol=1e-14)


def test_symmetry_and_permutation(rng):
    V = noisy_path(800, rng, d=3)
    est = E.mrc(V, DEXP, 0.2).estimate
    np.testing.assert_allclose(est, est.T, atol=1e-15)
    perm = [2, 0, 1]
    np.testing.assert_allclose(E.mrc(V[:, perm], DEXP, 0.2).estimate, est[np.ix_(perm, perm)], atol=1e-14)


def test_tick_input_equals_array_input(rng):
    path = simulate_path(PathModel.constant(1.0), fine_steps=2000, rng=rng)
    ticks = observe(path, sample_equidistant(2000), NoiseModel.scalar(0.01), rng=rng)
    a = E.mrc(ticks, TENT, 0.3, diagnostics=True)
    b = E.mrc(ticks.values, TENT, 0.3)
    np.testing.assert_allclose(a.estimate, b.estimate)
    assert a.diagnostics["long_run_variation"] == pytest.approx(1.0, rel=0.05)
    assert a.to_dict()["N_T"] == 2000


def test_consistency():
    est = [E.mrc(noisy_path(20_000, replication_rng(2, r)), DEXP, 0.1).estimate[0, 0] for r in range(20)]
    assert np.mean(est) == pytest.approx(1.0, abs=0.05)


def test_bounded_and_jittered_agree_in_the_limit():
    gaps = {}
    for n in (1000, 10_000):
        g = [abs(E.mrc_values(V, TENT, W.window_size(0.3, n), "bounded")[0][0, 0]
                 - E.mrc_values(V, TENT, W.window_size(0.3, n), "jittered")[0][0, 0]) * n ** 0.25
             for V in (noisy_path(n, replication_rng(20 + n, r)) for r in range(500))]
        gaps[n] = np.mean(g)
    assert gaps[10_000] < gaps[1000]


def test_autocovariances_and_realized_kernel(rng):
    x = rng.normal(size=50)
    ac = E.autocovariances(x, 5)
    np.testing.assert_allclose(ac, [np.dot(x[h:], x[:x.size - h]) for h in range(6)], atol=1e-12)
    assert E.realized_kernel(x, lambda u: np.zeros_like(u), 3.0) == pytest.approx(np.dot(x, x))
    flat = E.realized_kernel(x, lambda u: (u < 1).astype(float), 2.0)
    assert flat == pytest.approx(ac[0] + 2 * (ac[1] + ac[2]))
    with pytest.raises(InvalidInput):
        E.realized_kernel(x, W.k_opt, 0.5)


@pytest.mark.parametrize("spec", [TENT, DEXP], ids=["tent", "doubleexp"])
def test_oracle_avar_univariate_is_vC(spec):
    for sigma, ups, th in [(1.0, 0.01, 0.1), (0.5, 0.2, 0.7)]:
        A = E.oracle_avar(sigma ** 2, ups, 1.0, 1.0, spec, th)
        assert A[0, 0, 0, 0] == pytest.approx(E.v_C_v_J(spec, th, sigma, ups)[0], rel=1e-12)


def test_oracle_avar_constant_path_and_symmetry():
    S = np.array([[1.0, 0.3], [0.3, 2.0]])
    U = 0.01 * np.eye(2)
    A = E.oracle_avar(S, U, np.ones((2, 2)), 1.5, DEXP, 0.2)
    t = np.linspace(0, 1, 11)
    B = E.oracle_avar(np.broadcast_to(S, (11, 2, 2)), U, np.ones((2, 2)), np.full(11, 1.5), DEXP, 0.2, t)
    np.testing.assert_allclose(A, B, rtol=1e-12)
    np.testing.assert_allclose(A, A.transpose(1, 0, 2, 3))
    np.testing.assert_allclose(A, A.transpose(2, 3, 0, 1))
    with pytest.raises(InvalidInput):
        E.oracle_avar(S, U, 1.0, 0.0, DEXP, 0.2)


def test_efficiency_identity():
    for sigma, ups in [(1.0, 0.01), (0.2, 3.0)]:
        vc, _ = E.v_C_v_J(DEXP, E.oracle_theta(sigma, ups), sigma, ups)
        assert vc == pytest.approx(8 * sigma ** 3 * math.sqrt(ups), rel=1e-12)


def test_jump_variance_identity():
    g2 = W.make_double_exponential(math.sqrt(5.0))
    _, vj = E.v_C_v_J(g2, 0.1, 1.0, 0.01, jump_sum=2.0)
    assert vj > 0
    th = math.sqrt(g2.Phi12 / g2.Phi22) * 0.1
    _, best = E.v_C_v_J(g2, th, 1.0, 0.01, jump_sum=1.0)
    assert best == pytest.approx(4 * math.sqrt(5) * 0.1, rel=1e-12)


def test_studentize_masks_zero_variance():
    z, mask = E.studentize(np.eye(2) * 1.1, np.eye(2), _diag_avar([1.0, 0.0, 0.0, 4.0]), 16)
    assert z[0, 0] == pytest.approx(2 * 0.1 / 1.0)
    assert mask.tolist() == [[False, True], [True, False]] and np.isnan(z[0, 1])


def _diag_avar(diag):
    A = np.zeros((2, 2, 2, 2))
    for (k, l), v in zip([(0, 0), (0, 1), (1, 0), (1, 1)], diag):
        A[k, l, k, l] = v
    return A


def test_threshold_without_jumps(rng):
    V = noisy_path(10_000, rng)
    k = W.window_size(0.1, 10_000)
    c = E.default_threshold_constant([DEXP], k, 10_000, 1.0, 0.01, 0.2)
    dec = E.threshold_estimators(V, DEXP, DEXP, c, 0.2, 0.1)
    assert dec.exceed == 0 and dec.jv == 0.0
    assert dec.iv == pytest.approx(E.mrc(V, DEXP, 0.1).estimate[0, 0], rel=1e-12)


def test_threshold_additivity_and_jump_detection(rng):
    V = noisy_path(10_000, rng)
    V[5000:] += 1.0
    k = W.window_size(0.1, 10_000)
    c = E.default_threshold_constant([DEXP], k, 10_000, 1.0, 0.01, 0.2)
    dec = E.threshold_estimators(V, DEXP, DEXP, c, 0.2, 0.1)
    assert dec.qv == pytest.approx(E.mrc(V, DEXP, 0.1).estimate[0, 0], rel=1e-12)
    assert dec.jv == pytest.approx(1.0, abs=0.2) and dec.iv == pytest.approx(1.0, abs=0.2)
    with pytest.raises(InvalidInput):
        E.threshold_estimators(V, DEXP, DEXP, c, 0.3, 0.1)


def test_integrated_variance_unbiased_with_jump():
    n, reps = 10_000, 100
    k = W.window_size(0.1, n)
    g2 = W.make_double_exponential(math.sqrt(5.0))
    c = E.default_threshold_constant([DEXP, g2], k, n, 1.0, 0.01, 0.2)
    iv = []
    for r in range(reps):
        V = noisy_path(n, replication_rng(31, r))
        V[n // 2:] += 1.0
        iv.append(E.threshold_estimators(V, DEXP, g2, c, 0.2, 0.1).iv)
    # the halved bias coefficient; the full one would shift IV down by about 1
    assert abs(np.mean(iv) - 1.0) < 4 * np.std(iv) / math.sqrt(reps)


def test_tricity_odd_and_zero(rng):
    X = np.cumsum(rng.normal(size=501))
    assert E.tricity(-X, DEXP, 5, 500) == pytest.approx(-E.tricity(X, DEXP, 5, 500))
    assert E.tricity(np.full(50, 2.0), DEXP, 5, 50) == 0.0


def test_tricity_symmetric_barriers_center():
    vals = []
    for r in range(60):
        rng = replication_rng(77, r)
        path = simulate_path(PathModel.constant(1.0), fine_steps=200_000, rng=rng)
        t = hitting_observation_times(path, 1.0, 1.0, 2000, rng=rng).schedule.times
        vals.append(E.tricity(path.values_at(t, 0), DEXP, W.window_size(0.2, t.size - 1), 2000))
    assert abs(np.mean(vals)) < 3 * np.std(vals) / math.sqrt(len(vals))


def test_input_errors():
    with pytest.raises(InvalidInput):
        E.preaverage_bounded(np.arange(5.0), DEXP, 2)
    with pytest.raises(InvalidInput):
        E.mrc_values(np.arange(50.0), TENT, 3, "sideways")
    with pytest.raises(InvalidInput):
        E.mrc(np.zeros((2, 2, 2)), TENT, 0.1)
