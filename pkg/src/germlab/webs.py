"""Planar webs attached to the generic diagram types.

A web here is a list of functions on a domain of the (u, v) plane; the
foliations are their level sets.  Singular sets are found by a sign scan of
the pairwise Jacobian determinant, refined by bisection on grid edges.
"""

import os
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .exceptions import BadModulus, EmptySampleRegion, NoWeb, NotExpandableAtOrigin, UsageError
from .expr import Expr, eval_array, parse, taylor, to_text

VARS = ("u", "v")
DEFAULT_STEP = 1e-5
BISECT_TOL = 1e-10
TOL_ZERO = 1e-8

DOMAINS = ("plane", "v>0", "u>0,v>0", "delta")


def _expr(e):
    if isinstance(e, Expr):
        return e
    return parse(str(e), VARS)


BOUNDARY_RTOL = 1e-12


def delta_contains(u, v):
    """Interior of the cusp, 4u^3 + 27v^2 < 0.  Works on scalars and arrays.

    Points whose value is within rounding of zero count as boundary, so the
    parametrized edge (-3t^2, -2t^3) is never reported inside.
    """
    a = 4 * np.asarray(u, dtype=float) ** 3
    b = 27 * np.asarray(v, dtype=float) ** 2
    return a + b < -BOUNDARY_RTOL * (np.abs(a) + b)


@dataclass(frozen=True)
class FoliationConfig:
    functions: tuple
    domain: str = "plane"

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise UsageError(f"unknown domain {self.domain!r}; expected one of {DOMAINS}")

    @classmethod
    def from_json(cls, doc):
        try:
            fs = tuple(_expr(f) for f in doc["functions"])
        except (KeyError, TypeError) as exc:
            raise UsageError("web config needs a 'functions' list") from exc
        return cls(fs, doc.get("domain", "plane"))

    def to_json(self):
        return {"functions": [to_text(f.root) for f in self.functions], "domain": self.domain}

    def contains(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.domain == "v>0":
            return v > 0
        if self.domain == "u>0,v>0":
            return (u > 0) & (v > 0)
        if self.domain == "delta":
            return delta_contains(u, v)
        return np.ones(np.broadcast(u, v).shape, dtype=bool)

    def _edge_distance(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.domain == "v>0":
            return np.abs(v)
        if self.domain == "u>0,v>0":
            return np.minimum(np.abs(u), np.abs(v))
        return np.full(np.broadcast(u, v).shape, np.inf)

    def gradient(self, k, u, v, step=DEFAULT_STEP):
        """Finite-difference gradient of function ``k`` (0-based)."""
        f = self.functions[k]
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        # keep the stencil away from the excluded boundary
        h = np.minimum(step, 0.25 * self._edge_distance(u, v))
        h = np.where(h > 0, h, step)

        def d(g):
            # fourth-order central stencil
            return (g(-2) - 8 * g(-1) + 8 * g(1) - g(2)) / (12 * h)

        fu = d(lambda k: eval_array(f, u + k * h, v))
        fv = d(lambda k: eval_array(f, u, v + k * h))
        return fu, fv

    def jacobian_det(self, i, j, u, v, step=DEFAULT_STEP):
        """det d(f_i, f_j) with 1-based indices."""
        a = self.gradient(i - 1, u, v, step)
        b = self.gradient(j - 1, u, v, step)
        return a[0] * b[1] - a[1] * b[0], np.hypot(*a) * np.hypot(*b)


def v_I_web(theta="0", b=1):
    """The three foliations of the (V,I) normal form on {v > 0}."""
    theta = _expr(theta)
    try:
        j = taylor(theta, 2, exact=False)
    except NotExpandableAtOrigin as exc:
        raise BadModulus(f"theta is not smooth at the origin: {exc}") from exc
    low = [j[(0, 0)], j[(1, 0)], j[(0, 1)]]
    if any(abs(float(c)) > 1e-12 for c in low):
        raise BadModulus("theta must vanish at 0 together with its first derivatives")
    th = to_text(theta.root)
    fs = (
        parse("u + (u + v)*sqrt(v)", VARS),
        parse("u - (u + v)*sqrt(v)", VARS),
        parse(f"u + ({b})*v + ({th})", VARS),
    )
    return FoliationConfig(fs, "v>0")


@dataclass(frozen=True)
class WebSingularSet:
    pair: tuple
    points: np.ndarray

    def __len__(self):
        return len(self.points)

    def to_csv_rows(self):
        return [(float(p[0]), float(p[1])) for p in self.points]


def _bisect_edges(W, i, j, a, b, da, step):
    """Vectorized bisection of det along segments a -> b (rows of points)."""
    sa = np.sign(da)
    for _ in range(200):
        if np.max(np.abs(b - a), initial=0.0) <= BISECT_TOL:
            break
        m = 0.5 * (a + b)
        dm, _ = W.jacobian_det(i, j, m[:, 0], m[:, 1], step)
        left = np.sign(dm) == sa
        a = np.where(left[:, None], m, a)
        b = np.where(left[:, None], b, m)
    return 0.5 * (a + b)


def web_singular_set(W, pair, grid, step=DEFAULT_STEP):
    """Points where the pair ``(i, j)`` (1-based) of foliations is tangent.

    ``grid`` is ``(umin, umax, vmin, vmax, nu, nv)``.  Sign changes caused by
    poles of the determinant are discarded after refinement.
    """
    i, j = pair
    n = len(W.functions)
    if not (1 <= i <= n and 1 <= j <= n and i != j):
        raise UsageError(f"pair {pair} is not a pair of distinct indices in 1..{n}")
    umin, umax, vmin, vmax, nu, nv = grid
    us = np.linspace(umin, umax, int(nu))
    vs = np.linspace(vmin, vmax, int(nv))
    U, V = np.meshgrid(us, vs)
    D, _ = W.jacobian_det(i, j, U, V, step)
    D = np.where(W.contains(U, V) & np.isfinite(D), D, np.nan)

    found = [np.column_stack([U[D == 0], V[D == 0]])]
    for axis in (1, 0):
        if axis == 1:
            d0, d1 = D[:, :-1], D[:, 1:]
            p0 = np.stack([U[:, :-1], V[:, :-1]], -1)
            p1 = np.stack([U[:, 1:], V[:, 1:]], -1)
        else:
            d0, d1 = D[:-1, :], D[1:, :]
            p0 = np.stack([U[:-1, :], V[:-1, :]], -1)
            p1 = np.stack([U[1:, :], V[1:, :]], -1)
        mask = d0 * d1 < 0
        if mask.any():
            found.append(_bisect_edges(W, i, j, p0[mask], p1[mask], d0[mask], step))
    pts = np.concatenate(found) if found else np.zeros((0, 2))
    if len(pts):
        det, scale = W.jacobian_det(i, j, pts[:, 0], pts[:, 1], step)
        keep = np.abs(det) <= 1e-6 * np.maximum(scale, 1.0)
        pts = pts[keep]
        pts = pts[np.lexsort((pts[:, 0], pts[:, 1]))]
    return WebSingularSet((i, j), pts)


def _seed(seed):
    if seed is not None:
        return int(seed)
    return int(os.environ.get("GERMLAB_SEED", "0"))


class DeltaRegion:
    """The cusp interior {4u^3 + 27v^2 < 0} intersected with u > u_min."""

    def __init__(self, u_min=-0.3):
        if not u_min < 0:
            raise EmptySampleRegion(f"the rectangle u >= {u_min} misses the cusp interior")
        self.u_min = float(u_min)

    contains = staticmethod(delta_contains)

    def sample(self, n, seed=None):
        """Quasi-random interior points: u = -3 s^2 with |v| < 2 s^3."""
        if n <= 0:
            raise EmptySampleRegion("sample count must be positive")
        pts = qmc.Halton(d=2, scramble=True, seed=_seed(seed)).random(n)
        u = self.u_min * pts[:, 0]
        half = 2.0 * (-u / 3.0) ** 1.5
        v = (2.0 * pts[:, 1] - 1.0) * half
        inside = delta_contains(u, v)
        u, v = u[inside], v[inside]
        if len(u) == 0:
            raise EmptySampleRegion("no samples landed in the cusp interior")
        return u, v


@dataclass(frozen=True)
class EquivalenceReport:
    equivalent: bool
    max_theta_dev: float
    max_f_dev: float
    samples: int

    def to_json(self):
        return {
            "equivalent": self.equivalent,
            "max_theta_dev": self.max_theta_dev,
            "max_f_dev": self.max_f_dev,
            "samples": self.samples,
        }


def _max_dev(a, b):
    both_nan = np.isnan(a) & np.isnan(b)
    d = np.abs(a - b)
    d = np.where(both_nan, 0.0, np.where(np.isnan(d), np.inf, d))
    return float(np.max(d, initial=0.0))


def vi_I_equivalence_test(theta1, f1, theta2, f2, samples=2000, tol=TOL_ZERO, u_min=-0.3, seed=None):
    """Compare two (VI,I) normal-form data sets on sampled points of the cusp interior."""
    u, v = DeltaRegion(u_min).sample(samples, seed)
    th = _max_dev(eval_array(_expr(theta1), u, v), eval_array(_expr(theta2), u, v))
    fd = _max_dev(eval_array(_expr(f1), u, v), eval_array(_expr(f2), u, v))
    return EquivalenceReport(th <= tol and fd <= tol, th, fd, len(u))


@dataclass(frozen=True)
class WebDomain:
    pair_type: str
    multiplicity: int
    region: str

    def contains(self, u, v):
        return FoliationConfig((), self.region).contains(u, v)

    def to_json(self):
        return {"type": self.pair_type, "web": f"{self.multiplicity}-web", "region": self.region}


_WEB_DOMAINS = {
    "(III,III)": (4, "u>0,v>0"),
    "(III,I)^0": (3, "v>0"),
    "(III,I)^1": (3, "v>0"),
    "(IV,I)": (3, "v>0"),
    "(V,I)": (3, "v>0"),
    "(VI,I)": (4, "delta"),
}


def web_domain(pair_type):
    try:
        mult, region = _WEB_DOMAINS[pair_type]
    except KeyError:
        raise NoWeb(f"no web structure is attached to type {pair_type}") from None
    return WebDomain(pair_type, mult, region)
