"""Pointwise numerics for the boundary modulus equation

    a(t^4) = b(t)^2 * a(t b(t))^4.

With theta the inverse of t -> t b(t), c(x) = theta(x)/x and sigma = theta^4,
the solution is the infinite product

    a(x) = prod_k c(sigma^k(x)) ** (1 / (2 * 4**k)),

evaluated here in mpmath at a configurable working precision.  Nothing is
expanded into a series, so flat b (whose jet is 1) is handled like any other.
"""

from dataclasses import dataclass, field

import mpmath
import numpy as np

from .exceptions import DomainExceeded, NewtonDiverged, NotMonotone, UsageError
from .expr import Expr, eval_numeric, parse

DEFAULT_RADIUS = 0.4
DEFAULT_DPS = 40
DEFAULT_TARGET = 1e-30
MAX_NEWTON = 50
MAX_FACTORS = 64
MONOTONE_SAMPLES = 401


def _mpf(v):
    if hasattr(v, "numerator") and hasattr(v, "denominator") and not isinstance(v, float):
        return mpmath.mpf(int(v.numerator)) / int(v.denominator)
    return mpmath.mpf(v)


@dataclass(frozen=True)
class SmoothFunction1D:
    """A function of ``t`` given by an expression, trusted on ``|t| <= radius``."""

    expr: Expr
    radius: float = DEFAULT_RADIUS

    @classmethod
    def from_text(cls, text, radius=DEFAULT_RADIUS):
        return cls(parse(text, ("t",)), radius)

    def __call__(self, t):
        return eval_numeric(self.expr, (t,))


def _as_function(b, radius=DEFAULT_RADIUS):
    if isinstance(b, SmoothFunction1D):
        return b
    if isinstance(b, str):
        return SmoothFunction1D.from_text(b, radius)
    if isinstance(b, Expr):
        return SmoothFunction1D(b, radius)
    raise UsageError(f"cannot use {b!r} as a function of t")


class ModuliTriple:
    """theta, c and sigma for a given b, evaluated on demand.

    ``theta_inv`` is the inverse of ``t -> t b(t)``; it is defined on the
    image of ``[-radius, radius]``, which is where ``a`` can be evaluated.
    """

    def __init__(self, b, dps=DEFAULT_DPS):
        self.b = b
        self.dps = dps
        with mpmath.workdps(dps):
            r = _mpf(b.radius)
            self.t_range = (-r, r)
            self.x_range = (self._g(-r), self._g(r))
            self._tol = mpmath.mpf(10) ** (-(dps - 8))
            self._h = mpmath.mpf(10) ** (-(dps // 3))

    def _g(self, t):
        return t * _mpf(self.b(t))

    def _dg(self, t):
        h = self._h
        return (self._g(t + h) - self._g(t - h)) / (2 * h)

    def in_domain(self, x):
        return self.x_range[0] <= x <= self.x_range[1]

    def theta_inv(self, x):
        with mpmath.workdps(self.dps):
            x = _mpf(x)
            if not self.in_domain(x):
                raise DomainExceeded(f"x = {mpmath.nstr(x, 8)} outside [{mpmath.nstr(self.x_range[0], 8)}, {mpmath.nstr(self.x_range[1], 8)}]")
            if x == 0:
                return mpmath.mpf(0)
            lo, hi = self.t_range
            t = min(max(x, lo), hi)
            scale = abs(x)
            for _ in range(MAX_NEWTON):
                r = self._g(t) - x
                if abs(r) <= self._tol * scale:
                    return t
                if r > 0:
                    hi = t
                else:
                    lo = t
                d = self._dg(t)
                step = t - r / d if d > 0 else None
                # Newton step if it stays inside the bracket, bisection otherwise
                t = step if step is not None and lo < step < hi else (lo + hi) / 2
            raise NewtonDiverged(f"inversion of t*b(t) = {mpmath.nstr(x, 8)} did not converge in {MAX_NEWTON} steps")

    def c(self, x):
        with mpmath.workdps(self.dps):
            x = _mpf(x)
            if x == 0:
                return mpmath.mpf(1)
            return self.theta_inv(x) / x

    def sigma(self, x):
        with mpmath.workdps(self.dps):
            return self.theta_inv(x) ** 4

    def inversion_residual(self, x):
        with mpmath.workdps(self.dps):
            x = _mpf(x)
            return abs(x - self._g(self.theta_inv(x)))


def make_triple(b, dps=DEFAULT_DPS, radius=DEFAULT_RADIUS):
    """Build theta, c, sigma for ``b`` (an expression text, Expr or SmoothFunction1D)."""
    b = _as_function(b, radius)
    with mpmath.workdps(dps):
        b0 = _mpf(b(mpmath.mpf(0)))
        if abs(b0 - 1) > mpmath.mpf(10) ** (-(dps - 5)):
            raise UsageError(f"b(0) must be 1, got {mpmath.nstr(b0, 10)}")
        r = _mpf(b.radius)
        ts = mpmath.linspace(-r, r, MONOTONE_SAMPLES)
        g = [t * _mpf(b(t)) for t in ts]
        for i in range(1, len(g)):
            if not g[i] > g[i - 1]:
                raise NotMonotone(f"t*b(t) is not increasing near t = {mpmath.nstr(ts[i], 6)}")
        triple = ModuliTriple(b, dps)
        lo, hi = triple.x_range
        if lo > -r ** 4 or hi < r ** 4:
            raise DomainExceeded("sigma leaves the domain of theta")
    return triple


@dataclass
class ConvergenceReport:
    x: float
    value: float
    n_used: int
    tail_bound: float
    partial_values: list = field(default_factory=list)
    sup_log_c: list = field(default_factory=list)
    orbit: list = field(default_factory=list)
    lemma_ok: bool = True

    def to_json(self):
        return {
            "x": self.x,
            "value": self.value,
            "N_used": self.n_used,
            "tail_bound": self.tail_bound,
            "partial_values": self.partial_values,
            "sup_log_c": self.sup_log_c,
            "orbit": self.orbit,
            "lemma_ok": self.lemma_ok,
        }


def _sup_log_c(triple, r):
    # |log c| is sampled at the ends of [-r, r]; for c = 1 + o(1) these dominate
    if r == 0:
        return mpmath.mpf(0)
    vals = []
    for s in (-r, r):
        if triple.in_domain(s):
            vals.append(abs(mpmath.log(triple.c(s))))
    return max(vals) if vals else mpmath.mpf(0)


def a_product(triple, x, target_eps=DEFAULT_TARGET, report=False):
    """Value of the product solution at ``x``; with ``report`` also a ConvergenceReport."""
    with mpmath.workdps(triple.dps):
        x = _mpf(x)
        if not triple.in_domain(x):
            raise DomainExceeded(f"x = {mpmath.nstr(x, 8)} outside the domain of theta")
        target = _mpf(target_eps)
        s = x
        total = mpmath.mpf(0)
        weight = mpmath.mpf(1)
        partial, sups, orbit = [], [], [s]
        lemma_ok = True
        n = 0
        while True:
            total += weight * mpmath.log(triple.c(s))
            partial.append(total)
            s = triple.sigma(s)
            orbit.append(s)
            n += 1
            if x != 0 and not abs(s) < abs(x) ** (3 ** n):
                lemma_ok = False
            weight /= 4
            sup = _sup_log_c(triple, abs(s))
            sups.append(sup)
            tail = weight * sup * 4 / 3
            if tail < target or s == 0:
                break
            if n >= MAX_FACTORS:
                raise NewtonDiverged(f"product did not reach tail {target_eps} in {MAX_FACTORS} factors")
        value = mpmath.exp(total / 2)
    if not report:
        return value
    rep = ConvergenceReport(
        x=float(x),
        value=float(value),
        n_used=n,
        tail_bound=float(tail),
        partial_values=[float(p) for p in partial],
        sup_log_c=[float(v) for v in sups],
        orbit=[float(v) for v in orbit],
        lemma_ok=lemma_ok,
    )
    return value, rep


def default_grid(radius=DEFAULT_RADIUS, count=201):
    return [_mpf(v) for v in np.linspace(-radius, radius, count)]


def residual_eq35(b, a, grid, dps=DEFAULT_DPS):
    """max over grid of |a(t^4) - b(t)^2 a(t b(t))^4|."""
    b = _as_function(b) if not callable(b) else b
    worst = mpmath.mpf(0)
    with mpmath.workdps(dps):
        for t in grid:
            t = _mpf(t)
            bt = _mpf(b(t))
            r = abs(_mpf(a(t ** 4)) - bt ** 2 * _mpf(a(t * bt)) ** 4)
            worst = max(worst, r)
    return float(worst)


def pointwise_residuals(triple, grid, target_eps=DEFAULT_TARGET):
    """Rows (t, a(t), residual at t) for the CSV surface."""
    a = lambda s: a_product(triple, s, target_eps)
    rows = []
    with mpmath.workdps(triple.dps):
        for t in grid:
            t = _mpf(t)
            bt = _mpf(triple.b(t))
            r = abs(a(t ** 4) - bt ** 2 * a(t * bt) ** 4)
            rows.append((float(t), float(a(t)), float(r)))
    return rows


@dataclass(frozen=True)
class RecursionCheck:
    functional: float
    derivative: float


def s_recursion_check(triple, grid, step=1e-4, target_eps=DEFAULT_TARGET):
    """Residuals of S(x) = S(sigma(x))/4 + log c(x) and of its first derivative.

    S is 2 log a; derivatives are central differences with step ``step``,
    shrunk near the edge of the domain.
    """
    with mpmath.workdps(triple.dps):
        S = lambda s: 2 * mpmath.log(a_product(triple, s, target_eps))
        lo, hi = triple.x_range
        h0 = _mpf(step)
        fun = der = mpmath.mpf(0)
        for x in grid:
            x = _mpf(x)
            sx = triple.sigma(x)
            fun = max(fun, abs(S(x) - S(sx) / 4 - mpmath.log(triple.c(x))))
            h = min(h0, (x - lo) / 2, (hi - x) / 2)

            def d(fn, p, h=h):
                return (fn(p + h) - fn(p - h)) / (2 * h)

            hs = min(h0, (sx - lo) / 2, (hi - sx) / 2)
            dS_sx = (S(sx + hs) - S(sx - hs)) / (2 * hs)
            lam = d(triple.c, x) / triple.c(x)
            der = max(der, abs(d(S, x) - dS_sx * d(triple.sigma, x) / 4 - lam))
    return RecursionCheck(float(fun), float(der))


@dataclass(frozen=True)
class CrossCheck:
    max_deviation: float
    deviations: tuple
    samples: tuple
    slope: float


def _eval_jet(a, x):
    total = mpmath.mpf(0)
    for c in reversed(a.coeffs):
        total = total * x + _mpf(c)
    return total


def cross_check_formal(b, n=12, samples=None, b_jet=None, dps=DEFAULT_DPS):
    """Compare the product solution with the degree-n formal solution.

    ``b_jet`` defaults to the exact Taylor jet of ``b``.  The returned slope
    is the least-squares fit of log deviation against log x.
    """
    from .expr import taylor
    from .normal_forms import solve_moduli_formal

    b = _as_function(b)
    if b_jet is None:
        b_jet = taylor(b.expr, n, exact=True)
    a_bar = solve_moduli_formal(b_jet, n)
    triple = make_triple(b, dps=dps)
    if samples is None:
        samples = [0.01, 0.02, 0.03, 0.04, 0.05]
    devs = []
    with mpmath.workdps(dps):
        for x in samples:
            x = _mpf(x)
            devs.append(abs(a_product(triple, x) - _eval_jet(a_bar, x)))
    devs_f = tuple(float(d) for d in devs)
    slope = float("nan")
    xs = np.array([float(abs(_mpf(s))) for s in samples])
    ys = np.array(devs_f)
    if len(xs) >= 2 and np.all(ys > 0):
        slope = float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
    return CrossCheck(max(devs_f) if devs_f else 0.0, devs_f, tuple(float(s) for s in samples), slope)
