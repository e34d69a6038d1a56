r"""Pre-averaging weight functions and their integral constants.

For a weight ``g`` the correlation functional is

.. math::
    \phi_{u,v}(y) = \int_{-\infty}^{\infty} u(x-y)\,v(x)\,\mathrm{d}x,
    \qquad u, v \in \{g, g'\},

and the constants entering the asymptotic variance are
``psi1 = int g'^2``, ``psi2 = int g^2``,
``Phi22 = int_0^inf phi_gg^2``, ``Phi12 = int_0^inf phi_gg phi_g'g'``
and ``Phi11 = int_0^inf phi_g'g'^2``.

Tent and double-exponential weights carry closed forms; every weight is
also integrated numerically, so the closed forms double as oracles.
"""
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np
from scipy.integrate import quad, quad_vec

from .errors import InvalidInput, NumericFailure

QUAD_TOL = 1e-8
_TAIL = 40.0  # exp(-_TAIL) is far below the quadrature tolerance


class Constants(NamedTuple):
    psi1: float
    psi2: float
    Phi22: float
    Phi12: float
    Phi11: float


class QuadConstants(NamedTuple):
    values: Constants
    errors: Constants


@dataclass(frozen=True)
class WeightSpec:
    """A weight function ``g`` with derivative and support information.

    ``support`` is ``"bounded"`` (``g`` vanishes outside ``[0, 1]``) or
    ``"exponential"`` (``|g| + |g'|`` decays like ``exp(-decay |x|)``).
    ``kinks`` lists the points where ``g'`` jumps; they are passed to the
    quadrature as breakpoints.
    """

    name: str
    g: Callable[[np.ndarray], np.ndarray]
    dg: Callable[[np.ndarray], np.ndarray]
    g_scalar: Callable[[float], float]
    dg_scalar: Callable[[float], float]
    support: str
    decay: float = math.inf
    kinks: Tuple[float, ...] = ()
    closed: Optional[Constants] = None
    phi_closed: Optional[Callable[[str, str, np.ndarray], np.ndarray]] = field(default=None, repr=False)

    def __post_init__(self):
        if self.support not in ("bounded", "exponential"):
            raise InvalidInput(f"unknown support class {self.support!r}")

    @property
    def bounded(self):
        return self.support == "bounded"

    def span(self):
        """Interval outside which ``g`` is (numerically) zero."""
        if self.bounded:
            return 0.0, 1.0
        L = _TAIL / self.decay
        return -L, L

    @cached_property
    def quadrature(self) -> QuadConstants:
        return _quad_constants(self)

    @property
    def constants(self) -> Constants:
        return self.closed if self.closed is not None else self.quadrature.values

    psi1 = property(lambda self: self.constants.psi1)
    psi2 = property(lambda self: self.constants.psi2)
    Phi22 = property(lambda self: self.constants.Phi22)
    Phi12 = property(lambda self: self.constants.Phi12)
    Phi11 = property(lambda self: self.constants.Phi11)


def make_tent() -> WeightSpec:
    """``g(x) = min(x, 1 - x)`` on ``[0, 1]``."""

    def g(x):
        x = np.asarray(x, dtype=np.float64)
        return np.where((x > 0) & (x < 1), np.minimum(x, 1.0 - x), 0.0)

    def dg(x):
        x = np.asarray(x, dtype=np.float64)
        return np.where((x > 0) & (x < 0.5), 1.0, np.where((x >= 0.5) & (x < 1), -1.0, 0.0))

    def gs(x):
        return min(x, 1.0 - x) if 0.0 < x < 1.0 else 0.0

    def dgs(x):
        if 0.0 < x < 0.5:
            return 1.0
        return -1.0 if 0.5 <= x < 1.0 else 0.0

    closed = Constants(1.0, 1.0 / 12.0, 151.0 / 80640.0, 1.0 / 96.0, 1.0 / 6.0)
    return WeightSpec("tent", g, dg, gs, dgs, "bounded", kinks=(0.0, 0.5, 1.0), closed=closed)


def make_double_exponential(rate: float = 1.0) -> WeightSpec:
    """``g(x) = exp(-rate |x|)``; with ``rate = 1``, ``phi_gg`` is the kernel ``(1 + x) e^{-x}``."""
    if not rate > 0:
        raise InvalidInput("rate must be positive")
    a = float(rate)

    def g(x):
        return np.exp(-a * np.abs(x))

    def dg(x):
        x = np.asarray(x, dtype=np.float64)
        return -a * np.sign(x) * np.exp(-a * np.abs(x))

    def gs(x):
        return math.exp(-a * abs(x))

    def dgs(x):
        return -a * math.copysign(1.0, x) * math.exp(-a * abs(x)) if x != 0.0 else 0.0

    def phi_closed(u, v, y):
        y = np.asarray(y, dtype=np.float64)
        ay = a * np.abs(y)
        e = np.exp(-ay)
        if (u, v) == ("g", "g"):
            return (1.0 + ay) * e / a
        if (u, v) == ("dg", "dg"):
            return a * (1.0 - ay) * e
        if (u, v) == ("dg", "g"):
            return a * y * e
        return -a * y * e

    closed = Constants(a, 1.0 / a, 5.0 / (4.0 * a ** 3), 1.0 / (4.0 * a), a / 4.0)
    name = "doubleexp" if a == 1.0 else f"doubleexp:{rate:g}"
    return WeightSpec(name, g, dg, gs, dgs, "exponential", decay=a, kinks=(0.0,),
                      closed=closed, phi_closed=phi_closed)


def make_piecewise_linear(knots_x, knots_y, name=None) -> WeightSpec:
    """Piecewise-linear weight on ``[0, 1]`` through ``(0, 0)``, the knots and ``(1, 0)``."""
    xs = np.concatenate([[0.0], np.asarray(knots_x, dtype=np.float64), [1.0]])
    ys = np.concatenate([[0.0], np.asarray(knots_y, dtype=np.float64), [0.0]])
    if np.any(np.diff(xs) <= 0):
        raise InvalidInput("knots must be strictly increasing inside (0, 1)")
    if not np.any(ys):
        raise InvalidInput("weight must not vanish identically")
    slopes = np.diff(ys) / np.diff(xs)
    xl, yl, sl = xs.tolist(), ys.tolist(), slopes.tolist()

    def g(x):
        x = np.asarray(x, dtype=np.float64)
        return np.where((x > 0) & (x < 1), np.interp(x, xs, ys), 0.0)

    def dg(x):
        x = np.asarray(x, dtype=np.float64)
        j = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(slopes) - 1)
        return np.where((x > 0) & (x < 1), slopes[j], 0.0)

    def gs(x):
        if not 0.0 < x < 1.0:
            return 0.0
        for j in range(len(sl)):
            if x < xl[j + 1]:
                return yl[j] + sl[j] * (x - xl[j])
        return 0.0

    def dgs(x):
        if not 0.0 < x < 1.0:
            return 0.0
        for j in range(len(sl)):
            if x < xl[j + 1]:
                return sl[j]
        return 0.0

    label = name or "pwl:" + ",".join(f"{a:g}:{b:g}" for a, b in zip(knots_x, knots_y))
    return WeightSpec(label, g, dg, gs, dgs, "bounded", kinks=tuple(xl))


def from_name(name: str) -> WeightSpec:
    """Parse ``tent``, ``doubleexp[:rate]`` or ``pwl:x1:y1,x2:y2,...``."""
    head, _, arg = name.strip().partition(":")
    head = head.lower()
    if head == "tent":
        return make_tent()
    if head in ("doubleexp", "double-exp", "exp"):
        return make_double_exponential(_number(arg) if arg else 1.0)
    if head == "pwl":
        pairs = [p.split(":") for p in arg.split(",") if p]
        try:
            xs, ys = zip(*[(float(a), float(b)) for a, b in pairs])
        except ValueError:
            raise InvalidInput(f"bad piecewise-linear weight {name!r}") from None
        return make_piecewise_linear(xs, ys, name=name)
    raise InvalidInput(f"unknown weight {name!r}")


def _number(text):
    text = text.strip()
    if text.startswith("sqrt(") and text.endswith(")"):
        return math.sqrt(float(text[5:-1]))
    return float(text)


def catalogue():
    """The shipped weights."""
    return [make_tent(), make_double_exponential(1.0), make_double_exponential(math.sqrt(5.0))]


# -- correlation functional ---------------------------------------------------

def _pick(spec, which):
    if which == "g":
        return spec.g_scalar
    if which == "dg":
        return spec.dg_scalar
    raise InvalidInput(f"selector must be 'g' or 'dg', got {which!r}")


def _phi_quad(spec, u, v, y):
    fu, fv = _pick(spec, u), _pick(spec, v)
    lo, hi = spec.span()
    a, b = max(lo, lo + y), min(hi, hi + y)
    if a >= b:
        return 0.0, 0.0
    pts = sorted({k for k in spec.kinks if a < k < b} | {k + y for k in spec.kinks if a < k + y < b})
    val, err = quad(lambda x: fu(x - y) * fv(x), a, b, points=pts or None,
                    limit=200, epsabs=1e-13, epsrel=1e-12)
    return val, err


def phi(u: str, v: str, spec: WeightSpec, y, closed=True):
    """``phi_{u,v}(y)`` for selectors ``u, v`` in ``{"g", "dg"}``.

    Uses the registered closed form when ``closed`` and one exists,
    adaptive quadrature otherwise.
    """
    if closed and spec.phi_closed is not None:
        return spec.phi_closed(u, v, y)
    ys = np.asarray(y, dtype=np.float64)
    out = np.empty(ys.shape)
    for i, yi in np.ndenumerate(ys):
        val, err = _phi_quad(spec, u, v, float(yi))
        if err > QUAD_TOL:
            raise NumericFailure(f"phi quadrature did not converge at y={yi}", err)
        out[i] = val
    return out if ys.ndim else float(out)


def kernel(spec: WeightSpec, closed=True):
    """Normalized kernel ``K(x) = phi_gg(x) / psi2``, so ``K(0) = 1``."""
    psi2 = spec.psi2

    def K(x):
        return phi("g", "g", spec, np.abs(np.asarray(x, dtype=np.float64)), closed=closed) / psi2

    return K


def k_opt(x):
    """``(1 + x) e^{-x}``, the efficient realized-kernel weight."""
    x = np.asarray(x, dtype=np.float64)
    return (1.0 + x) * np.exp(-x)


def _quad_constants(spec: WeightSpec) -> QuadConstants:
    lo, hi = spec.span()
    kinks = sorted(k for k in spec.kinks if lo < k < hi) or None
    psi1, e1 = quad(lambda x: spec.dg_scalar(x) ** 2, lo, hi, points=kinks, limit=200,
                    epsabs=1e-13, epsrel=1e-12)
    psi2, e2 = quad(lambda x: spec.g_scalar(x) ** 2, lo, hi, points=kinks, limit=200,
                    epsabs=1e-13, epsrel=1e-12)
    inner_err = [0.0]

    def integrand(y):
        a, ea = _phi_quad(spec, "g", "g", y)
        b, eb = _phi_quad(spec, "dg", "dg", y)
        inner_err[0] = max(inner_err[0], ea, eb)
        return np.array([a * a, a * b, b * b])

    ymax = hi - lo
    # phi_{u,v} has kinks at differences of kinks of g
    ks = spec.kinks
    ypts = sorted({abs(p - q) for p in ks for q in ks if 0 < abs(p - q) < ymax}) or None
    vals, err = quad_vec(integrand, 0.0, ymax, epsabs=1e-11, epsrel=1e-11, points=ypts, limit=400)
    # an inner error e perturbs phi^2 by at most ~2 |phi|_inf e over a range of length ymax
    scale = 2.0 * ymax * max(psi1, psi2, 1.0)
    outer = err + scale * inner_err[0]
    values = Constants(psi1, psi2, *map(float, vals))
    errors = Constants(e1, e2, outer, outer, outer)
    if max(errors) > QUAD_TOL:
        raise NumericFailure(f"constants for {spec.name} not within {QUAD_TOL}", max(errors))
    return QuadConstants(values, errors)


def constants(spec: WeightSpec, closed=False) -> Constants:
    """``(psi1, psi2, Phi22, Phi12, Phi11)``; by quadrature unless ``closed``."""
    return spec.constants if closed else spec.quadrature.values


# -- discretization -------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteWeights:
    """Samples ``g(p / k_n)`` for integer offsets ``p`` and their first differences."""

    k_n: int
    offsets: np.ndarray
    samples: np.ndarray
    diffs: np.ndarray
    d_n: int

    def weight_for_offset(self, p):
        return self.samples[p - self.offsets[0]]


def discretize(spec: WeightSpec, k_n: int, tolerance: float = 1e-12) -> DiscreteWeights:
    """Sample ``g`` on ``p / k_n``.

    Bounded weights use ``p = 1..k_n - 1``. Exponentially decaying
    weights use ``|p| <= d_n`` where ``d_n`` is the smallest offset beyond
    which ``|g| < tolerance``.
    """
    if k_n < 2:
        raise InvalidInput("k_n must be >= 2")
    if spec.bounded:
        offsets = np.arange(1, k_n)
        d_n = k_n - 1
    else:
        peak = max(abs(spec.g_scalar(0.0)), 1.0)
        d_n = int(math.ceil(k_n * math.log(peak / tolerance) / spec.decay))
        while d_n > 0 and abs(spec.g_scalar((d_n - 1) / k_n)) < tolerance and \
                abs(spec.g_scalar(-(d_n - 1) / k_n)) < tolerance:
            d_n -= 1
        offsets = np.arange(-d_n, d_n + 1)
    samples = spec.g(offsets / k_n)
    full = spec.g(np.arange(offsets[0] - 1, offsets[-1] + 2) / k_n)
    return DiscreteWeights(k_n, offsets, samples, np.diff(full), d_n)


def window_size(theta: float, n: int) -> int:
    """``k_n = round(theta sqrt(n))``, at least 2."""
    if not theta > 0 or n < 1:
        raise InvalidInput("theta must be positive and n >= 1")
    return max(2, int(math.floor(theta * math.sqrt(n) + 0.5)))
