import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mrcov import weights as W
from mrcov.errors import InvalidInput


def test_tent_closed_forms():
    c = W.make_tent().quadrature.values
    np.testing.assert_allclose(c, (1.0, 1 / 12, 151 / 80640, 1 / 96, 1 / 6), atol=1e-10)


@pytest.mark.parametrize("a", [0.5, 1.0, math.sqrt(5.0), 3.0])
def test_double_exponential_closed_forms(a):
    c = W.make_double_exponential(a).quadrature.values
    np.testing.assert_allclose(c, (a, 1 / a, 5 / (4 * a ** 3), 1 / (4 * a), a / 4), rtol=1e-9)


@pytest.mark.parametrize("u,v", [("g", "g"), ("g", "dg"), ("dg", "g"), ("dg", "dg")])
def test_phi_closed_matches_quadrature(u, v):
    spec = W.make_double_exponential(1.7)
    y = np.array([-2.0, -0.3, 0.0, 0.4, 1.0, 3.5])
    np.testing.assert_allclose(W.phi(u, v, spec, y), W.phi(u, v, spec, y, closed=False), atol=1e-10)


def test_phi_tent_at_zero_is_psi2():
    assert W.phi("g", "g", W.make_tent(), 0.0) == pytest.approx(1 / 12, abs=1e-12)
    assert W.phi("g", "g", W.make_tent(), 1.5) == 0.0


def test_kernel_normalized():
    K = W.kernel(W.make_double_exponential())
    assert K(0.0) == pytest.approx(1.0)
    np.testing.assert_allclose(K([1.0, 2.0]), W.k_opt([1.0, 2.0]))


@given(st.floats(0.0, 6.0), st.floats(0.2, 4.0))
def test_phi_is_even_and_bounded(y, a):
    spec = W.make_double_exponential(a)
    assert W.phi("g", "g", spec, y) == pytest.approx(W.phi("g", "g", spec, -y))
    assert abs(W.phi("g", "g", spec, y)) <= spec.psi2 * (1 + 1e-12)


def test_discretize_double_exponential_truncation():
    dw = W.discretize(W.make_double_exponential(), 10)
    assert dw.d_n == 277
    assert dw.samples[0] < 1e-12 and dw.samples[dw.d_n] == 1.0


def test_discretize_tent():
    dw = W.discretize(W.make_tent(), 4)
    np.testing.assert_array_equal(dw.offsets, [1, 2, 3])
    np.testing.assert_allclose(dw.samples, [0.25, 0.5, 0.25])


@pytest.mark.parametrize("theta,n,k", [(0.1, 10_000, 10), (0.5, 100, 5), (0.01, 100, 2), (0.25, 100, 3)])
def test_window_size(theta, n, k):
    assert W.window_size(theta, n) == k


def test_piecewise_linear_reproduces_tent():
    pwl = W.make_piecewise_linear([0.5], [0.5])
    np.testing.assert_allclose(pwl.quadrature.values, W.make_tent().closed, atol=1e-9)


def test_from_name():
    assert W.from_name("tent").name == "tent"
    assert W.from_name("doubleexp").psi1 == 1.0
    assert W.from_name("doubleexp:sqrt(5)").psi1 == pytest.approx(math.sqrt(5))
    assert W.from_name("pwl:0.5:0.5").psi2 == pytest.approx(1 / 12)


@pytest.mark.parametrize("name", ["gauss", "pwl:0:1,oops", "doubleexp:-1"])
def test_from_name_rejects(name):
    with pytest.raises(InvalidInput):
        W.from_name(name)


def test_rejects_bad_arguments():
    with pytest.raises(InvalidInput):
        W.discretize(W.make_tent(), 1)
    with pytest.raises(InvalidInput):
        W.window_size(0.0, 100)
    with pytest.raises(InvalidInput):
        W.phi("g", "h", W.make_tent(), 0.0)


@pytest.mark.parametrize("spec", W.catalogue(), ids=lambda s: s.name)
def test_cauchy_schwarz_gap(spec):
    c = spec.quadrature.values
    assert 2 * math.sqrt(c.Phi22 * c.Phi12) > c.psi2 ** 2
