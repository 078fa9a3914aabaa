"""Truncated power series at the origin in one (``Jet1``) or two (``Jet2``) variables.

Coefficients are either exact rationals (``gmpy2.mpq``) or Python floats.  A jet
is homogeneous: mixing an exact jet with a float jet or a float scalar converts
the result to floats.  Zero tests on floats use the context-wide ``tol_zero``
(see :func:`tolerance`).

Arithmetic between jets of different degree truncates to the smaller degree.
"""
from __future__ import annotations

import contextlib
import contextvars
import math
import numbers
from fractions import Fraction

import gmpy2
from gmpy2 import mpq

from .exceptions import (
    ImplicitDegenerate,
    InexactRootError,
    InnerNotBased,
    NonPositiveConstantTerm,
    NonUnitDivisor,
    NotInvertible,
    NotXRegularOrder2,
    SingularAtOrigin,
    UsageError,
)

DEFAULT_DEGREE = 12
DEFAULT_TOL = 1e-9

_TOL = contextvars.ContextVar("tol_zero", default=DEFAULT_TOL)

__all__ = [
    "DEFAULT_DEGREE",
    "Jet1",
    "Jet2",
    "compose1",
    "compose_maps",
    "exact_root",
    "identity_map",
    "implicit_solve",
    "invert1",
    "invert_map2",
    "is_zero",
    "jet_from_json",
    "jet_to_json",
    "ring_ops",
    "scalar",
    "substitute2",
    "tol_zero",
    "tolerance",
    "weierstrass_divide",
]


@contextlib.contextmanager
def tolerance(tol):
    """Temporarily set the floating-point zero tolerance."""
    token = _TOL.set(float(tol))
    try:
        yield
    finally:
        _TOL.reset(token)


def tol_zero():
    return _TOL.get()


def is_zero(c):
    if isinstance(c, float):
        return abs(c) <= _TOL.get()
    return c == 0


def scalar(x):
    """Coerce ``x`` to a jet coefficient: floats stay floats, everything else is exact."""
    if isinstance(x, float):
        return x
    if isinstance(x, type(mpq())):
        return x
    if isinstance(x, (int, Fraction)):
        return mpq(x)
    if isinstance(x, str):
        try:
            return mpq(Fraction(x))
        except ValueError as exc:
            raise UsageError(f"not a rational literal: {x!r}") from exc
    if isinstance(x, numbers.Rational):
        return mpq(int(x.numerator), int(x.denominator))
    if isinstance(x, numbers.Real):
        return float(x)
    raise TypeError(f"unsupported coefficient type {type(x).__name__}")


_MPQ = type(mpq())


def _is_exact(c):
    return not isinstance(c, float)


def _zero(exact):
    return mpq(0) if exact else 0.0


def _to_float(c):
    return float(c)


def exact_root(q, n):
    """Exact ``n``-th root of a rational, real branch; raises if irrational."""
    q = mpq(q)
    if n <= 0:
        raise ValueError("root index must be positive")
    neg = q < 0
    if neg and n % 2 == 0:
        raise NonPositiveConstantTerm(f"even root of negative constant {q}")
    num, den = abs(q.numerator), q.denominator
    rn, okn = gmpy2.iroot(num, n)
    rd, okd = gmpy2.iroot(den, n)
    if not (okn and okd):
        raise InexactRootError(f"{n}-th root of {q} is irrational; use float mode")
    r = mpq(int(rn), int(rd))
    return -r if neg else r


def _rpow_const(c, p):
    """``c**p`` for a positive constant and rational exponent ``p``."""
    if isinstance(c, float):
        return c ** float(p)
    p = mpq(p)
    base = c ** int(p.numerator) if p.numerator >= 0 else 1 / c ** int(-p.numerator)
    return exact_root(base, int(p.denominator))


def _binomial(p, k):
    out = mpq(1) if not isinstance(p, float) else 1.0
    for i in range(k):
        out = out * (p - i) / (i + 1)
    return out


class _JetBase:
    """Ring operations shared by Jet1 and Jet2; subclasses supply storage."""

    __slots__ = ()

    # subclasses define: degree, exact, constant_term, _add, _mul, _scale,
    # _const_like, to_float, truncate

    def _coerce(self, other):
        if isinstance(other, _JetBase):
            if type(other) is not type(self):
                raise TypeError("cannot mix Jet1 and Jet2")
            a, b = self, other
        else:
            c = scalar(other)
            b = self._const_like(c)
            a = self
        if a.exact != b.exact:
            a, b = a.to_float(), b.to_float()
        return a, b

    def __add__(self, other):
        a, b = self._coerce(other)
        return a._add(b, 1)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._coerce(other)
        return a._add(b, -1)

    def __rsub__(self, other):
        a, b = self._coerce(other)
        return b._add(a, -1)

    def __neg__(self):
        return self._scale(-1)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if not isinstance(other, _JetBase):
            c = scalar(other)
            if isinstance(c, float) and self.exact:
                return self.to_float()._scale(c)
            return self._scale(c)
        a, b = self._coerce(other)
        return a._mul(b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, _JetBase):
            c = scalar(other)
            if is_zero(c):
                raise NonUnitDivisor("division by a zero constant")
            if isinstance(c, float) and self.exact:
                return self.to_float()._scale(1.0 / c)
            return self._scale(1 / c)
        a, b = self._coerce(other)
        return a._mul(b.reciprocal())

    def __rtruediv__(self, other):
        a, b = self._coerce(other)
        return b._mul(a.reciprocal())

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("jets only take integer powers; use rpow_unit")
        if n < 0:
            return self.reciprocal() ** (-n)
        result = self._const_like(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- series functions ------------------------------------------------
    def _nilpotent(self):
        c0 = self.constant_term
        return c0, self - self._const_like(c0)

    def _series(self, coeffs):
        """Evaluate sum coeffs[k] * n**k where n is the non-constant part (Horner)."""
        _, n = self._nilpotent()
        result = self._const_like(coeffs[-1])
        for c in reversed(coeffs[:-1]):
            result = result * n + c
        return result

    def reciprocal(self):
        c0 = self.constant_term
        if is_zero(c0):
            raise NonUnitDivisor("divisor has zero constant term")
        d = self.degree
        return self._series([(-1) ** k / c0 ** (k + 1) for k in range(d + 1)])

    def rpow_unit(self, p):
        """Real power of a series with positive constant term (binomial series)."""
        c0 = self.constant_term
        if is_zero(c0) or c0 < 0:
            raise NonPositiveConstantTerm(f"constant term {c0} is not positive")
        p = float(p) if not self.exact else mpq(Fraction(p) if isinstance(p, (str, float)) else p)
        lead = _rpow_const(c0, p)
        d = self.degree
        return self._series([lead * _binomial(p, k) / c0 ** k for k in range(d + 1)])

    def sqrt_unit(self):
        return self.rpow_unit(Fraction(1, 2))

    def exp(self):
        c0 = self.constant_term
        if self.exact:
            if c0 != 0:
                raise InexactRootError("exp of a nonzero rational constant is irrational")
            lead = mpq(1)
        else:
            lead = math.exp(c0)
        d = self.degree
        coeffs = []
        fact = 1
        for k in range(d + 1):
            if k:
                fact *= k
            coeffs.append(lead / fact if not self.exact else lead / mpq(fact))
        return self._series(coeffs)

    def log(self):
        c0 = self.constant_term
        if is_zero(c0) or c0 < 0:
            raise NonPositiveConstantTerm(f"log of series with constant term {c0}")
        if self.exact:
            if c0 != 1:
                raise InexactRootError("log of a rational constant other than 1 is irrational")
            lead = mpq(0)
        else:
            lead = math.log(c0)
        d = self.degree
        coeffs = [lead] + [(-1) ** (k + 1) / (k * c0 ** k) for k in range(1, d + 1)]
        return self._series(coeffs)


class Jet1(_JetBase):
    """Truncated series ``sum c[k] t**k`` for ``k <= degree``."""

    __slots__ = ("_c", "exact")

    def __init__(self, coeffs, degree=None):
        cs = [scalar(c) for c in coeffs]
        if not cs:
            cs = [mpq(0)]
        exact = all(_is_exact(c) for c in cs)
        if not exact:
            cs = [float(c) for c in cs]
        if degree is None:
            degree = len(cs) - 1
        if degree < 0:
            raise ValueError("degree must be non-negative")
        z = _zero(exact)
        cs = cs[: degree + 1] + [z] * (degree + 1 - len(cs))
        self._c = tuple(cs)
        self.exact = exact

    @classmethod
    def _raw(cls, cs, exact):
        obj = cls.__new__(cls)
        obj._c = tuple(cs)
        obj.exact = exact
        return obj

    @classmethod
    def variable(cls, degree=DEFAULT_DEGREE, exact=True):
        z = _zero(exact)
        one = mpq(1) if exact else 1.0
        return cls._raw([z, one] + [z] * (degree - 1), exact) if degree >= 1 else cls._raw([z], exact)

    @classmethod
    def constant(cls, c, degree=DEFAULT_DEGREE):
        c = scalar(c)
        return cls([c], degree)

    @classmethod
    def zero(cls, degree=DEFAULT_DEGREE, exact=True):
        return cls._raw([_zero(exact)] * (degree + 1), exact)

    @property
    def degree(self):
        return len(self._c) - 1

    @property
    def coeffs(self):
        return self._c

    @property
    def constant_term(self):
        return self._c[0]

    def __getitem__(self, k):
        if 0 <= k < len(self._c):
            return self._c[k]
        if k < 0:
            raise IndexError(k)
        return _zero(self.exact)

    def __len__(self):
        return len(self._c)

    def __iter__(self):
        return iter(self._c)

    def __eq__(self, other):
        if isinstance(other, Jet1):
            return self._c == other._c
        return NotImplemented

    def __hash__(self):
        return hash(self._c)

    def __repr__(self):
        return f"Jet1({format_jet(self)}, degree={self.degree})"

    def _const_like(self, c):
        c = scalar(c)
        exact = self.exact and _is_exact(c)
        z = _zero(exact)
        c = c if exact else float(c)
        return Jet1._raw([c] + [z] * self.degree, exact)

    def to_float(self):
        if not self.exact:
            return self
        return Jet1._raw([float(c) for c in self._c], False)

    def to_exact(self):
        if self.exact:
            return self
        return Jet1._raw([mpq(Fraction(c)) for c in self._c], True)

    def truncate(self, degree):
        if degree >= self.degree:
            return self
        return Jet1._raw(self._c[: degree + 1], self.exact)

    def _add(self, other, sign):
        d = min(self.degree, other.degree)
        a, b = self._c, other._c
        if sign > 0:
            return Jet1._raw([a[k] + b[k] for k in range(d + 1)], self.exact)
        return Jet1._raw([a[k] - b[k] for k in range(d + 1)], self.exact)

    def _scale(self, c):
        return Jet1._raw([x * c for x in self._c], self.exact and _is_exact(c))

    def _mul(self, other):
        d = min(self.degree, other.degree)
        a, b = self._c, other._c
        z = _zero(self.exact)
        out = [z] * (d + 1)
        for i in range(d + 1):
            ai = a[i]
            if ai == 0:
                continue
            for j in range(d + 1 - i):
                bj = b[j]
                if bj != 0:
                    out[i + j] += ai * bj
        return Jet1._raw(out, self.exact)

    def order(self):
        """Index of the first coefficient that is not zero (within tolerance); None for the zero jet."""
        for k, c in enumerate(self._c):
            if not is_zero(c):
                return k
        return None

    def derivative(self):
        if self.degree == 0:
            return Jet1._raw([_zero(self.exact)], self.exact)
        return Jet1._raw([k * self._c[k] for k in range(1, len(self._c))], self.exact)

    def shift_down(self, n=1):
        """Divide by ``t**n``; the first ``n`` coefficients must vanish."""
        for k in range(min(n, len(self._c))):
            if not is_zero(self._c[k]):
                raise NonUnitDivisor(f"coefficient of t^{k} is nonzero; cannot divide by t^{n}")
        cs = self._c[n:] or (_zero(self.exact),)
        return Jet1._raw(cs, self.exact)

    def shift_up(self, n=1):
        """Multiply by ``t**n`` keeping the degree."""
        z = _zero(self.exact)
        return Jet1._raw(([z] * n + list(self._c))[: len(self._c)], self.exact)

    def scale_variable(self, s):
        """Return ``t -> a(s t)``."""
        s = scalar(s)
        return Jet1([c * s ** k for k, c in enumerate(self._c)], self.degree)

    def compose(self, inner):
        return compose1(self, inner)

    def __call__(self, inner):
        if isinstance(inner, _JetBase):
            return compose1(self, inner)
        return self.evaluate(inner)

    def evaluate(self, t):
        """Polynomial value of the truncation at a numeric point (Horner)."""
        acc = 0
        cs = self._c if not isinstance(t, float) else [float(c) for c in self._c]
        for c in reversed(cs):
            acc = acc * t + c
        return acc

    def invert(self):
        return invert1(self)

    def max_abs(self):
        return max((abs(c) for c in self._c), default=0)

    def is_zero_jet(self):
        return all(is_zero(c) for c in self._c)


class Jet2(_JetBase):
    """Truncated series ``sum c[i, j] x**i y**j`` for ``i + j <= degree``.

    Storage is a sparse dict keyed by exponent pairs; exact zeros are dropped.
    """

    __slots__ = ("_c", "degree", "exact")

    def __init__(self, coeffs=None, degree=DEFAULT_DEGREE):
        coeffs = coeffs or {}
        items = {}
        exact = True
        for (i, j), c in coeffs.items():
            if i < 0 or j < 0:
                raise ValueError("negative exponent")
            if i + j > degree:
                continue
            c = scalar(c)
            if isinstance(c, float):
                exact = False
            items[(int(i), int(j))] = c
        if not exact:
            items = {k: float(v) for k, v in items.items()}
        self._c = {k: v for k, v in items.items() if v != 0}
        self.degree = int(degree)
        self.exact = exact

    @classmethod
    def _raw(cls, c, degree, exact):
        obj = cls.__new__(cls)
        obj._c = c
        obj.degree = degree
        obj.exact = exact
        return obj

    @classmethod
    def x(cls, degree=DEFAULT_DEGREE, exact=True):
        return cls._raw({(1, 0): mpq(1) if exact else 1.0} if degree >= 1 else {}, degree, exact)

    @classmethod
    def y(cls, degree=DEFAULT_DEGREE, exact=True):
        return cls._raw({(0, 1): mpq(1) if exact else 1.0} if degree >= 1 else {}, degree, exact)

    @classmethod
    def constant(cls, c, degree=DEFAULT_DEGREE):
        return cls({(0, 0): c}, degree)

    @classmethod
    def zero(cls, degree=DEFAULT_DEGREE, exact=True):
        return cls._raw({}, degree, exact)

    @classmethod
    def from_jet1(cls, a, axis="x", degree=None):
        """Embed ``a(t)`` as ``a(x)`` or ``a(y)``."""
        d = a.degree if degree is None else min(degree, a.degree)
        if axis == "x":
            c = {(k, 0): a[k] for k in range(d + 1) if a[k] != 0}
        else:
            c = {(0, k): a[k] for k in range(d + 1) if a[k] != 0}
        return cls._raw(c, d if degree is None else degree, a.exact)

    def __getitem__(self, key):
        return self._c.get(key, _zero(self.exact))

    def terms(self):
        return self._c.items()

    def __eq__(self, other):
        if isinstance(other, Jet2):
            return self.degree == other.degree and self._c == other._c
        return NotImplemented

    def __hash__(self):
        return hash((self.degree, frozenset(self._c.items())))

    def __repr__(self):
        return f"Jet2({format_jet(self)}, degree={self.degree})"

    @property
    def constant_term(self):
        return self._c.get((0, 0), _zero(self.exact))

    def _const_like(self, c):
        c = scalar(c)
        exact = self.exact and _is_exact(c)
        c = c if exact else float(c)
        return Jet2._raw({(0, 0): c} if c != 0 else {}, self.degree, exact)

    def to_float(self):
        if not self.exact:
            return self
        return Jet2._raw({k: float(v) for k, v in self._c.items()}, self.degree, False)

    def to_exact(self):
        if self.exact:
            return self
        return Jet2._raw({k: mpq(Fraction(v)) for k, v in self._c.items()}, self.degree, True)

    def truncate(self, degree):
        if degree >= self.degree:
            return self
        return Jet2._raw({k: v for k, v in self._c.items() if k[0] + k[1] <= degree}, degree, self.exact)

    def _add(self, other, sign):
        d = min(self.degree, other.degree)
        out = {k: v for k, v in self._c.items() if k[0] + k[1] <= d}
        for k, v in other._c.items():
            if k[0] + k[1] > d:
                continue
            s = out.get(k)
            nv = (v if sign > 0 else -v) if s is None else (s + v if sign > 0 else s - v)
            if nv == 0:
                out.pop(k, None)
            else:
                out[k] = nv
        return Jet2._raw(out, d, self.exact)

    def _scale(self, c):
        if c == 0:
            return Jet2._raw({}, self.degree, self.exact and _is_exact(c))
        return Jet2._raw({k: v * c for k, v in self._c.items()}, self.degree, self.exact and _is_exact(c))

    def _by_degree(self, d):
        groups = [[] for _ in range(d + 1)]
        for (i, j), v in self._c.items():
            if i + j <= d:
                groups[i + j].append((i, j, v))
        return groups

    def _mul(self, other):
        d = min(self.degree, other.degree)
        if not self._c or not other._c:
            return Jet2._raw({}, d, self.exact)
        # Pack (i, j) as i * S + j so sums of exponents are sums of ints.
        S = d + 1
        blist = sorted(((i + j, i * S + j, v) for (i, j), v in other._c.items() if i + j <= d))
        cut = [0] * (d + 1)
        n = 0
        for m in range(d + 1):
            while n < len(blist) and blist[n][0] <= m:
                n += 1
            cut[m] = n
        bpairs = [(e, v) for _, e, v in blist]
        out = {}
        get = out.get
        for (i, j), a in self._c.items():
            k = i + j
            if k > d:
                continue
            ea = i * S + j
            for eb, b in bpairs[: cut[d - k]]:
                key = ea + eb
                out[key] = get(key, 0) + a * b
        return Jet2._raw({divmod(e, S): v for e, v in out.items() if v != 0}, d, self.exact)

    def order(self):
        """Lowest total degree carrying a coefficient that is not zero (tolerance-aware)."""
        best = None
        for (i, j), v in self._c.items():
            if not is_zero(v) and (best is None or i + j < best):
                best = i + j
        return best

    def dx(self):
        d = max(self.degree - 1, 0)
        return Jet2._raw({(i - 1, j): i * v for (i, j), v in self._c.items() if i > 0 and i - 1 + j <= d}, d, self.exact)

    def dy(self):
        d = max(self.degree - 1, 0)
        return Jet2._raw({(i, j - 1): j * v for (i, j), v in self._c.items() if j > 0 and i + j - 1 <= d}, d, self.exact)

    def gradient_at_origin(self):
        return self[(1, 0)], self[(0, 1)]

    def hessian_at_origin(self):
        return ((2 * self[(2, 0)], self[(1, 1)]), (self[(1, 1)], 2 * self[(0, 2)]))

    def restrict_x(self):
        """The one-variable jet ``t -> F(t, 0)``."""
        return Jet1([self[(k, 0)] for k in range(self.degree + 1)], self.degree) if self.exact or True else None

    def restrict_y(self):
        """The one-variable jet ``t -> F(0, t)``."""
        return Jet1([self[(0, k)] for k in range(self.degree + 1)], self.degree)

    def substitute(self, g, h):
        return substitute2(self, g, h)

    def __call__(self, g, h):
        if isinstance(g, _JetBase) or isinstance(h, _JetBase):
            return substitute2(self, g, h)
        return self.evaluate(g, h)

    def evaluate(self, x, y):
        acc = 0
        to_f = isinstance(x, float) or isinstance(y, float)
        for (i, j), v in self._c.items():
            acc += (float(v) if to_f else v) * x ** i * y ** j
        return acc

    def split_parity_y(self):
        """Write ``F(x, y) = alpha(x, y**2) + y * beta(x, y**2)``; returns ``(alpha, beta)`` in (u, v)."""
        alpha, beta = {}, {}
        for (i, j), v in self._c.items():
            if j % 2 == 0:
                alpha[(i, j // 2)] = v
            else:
                beta[(i, (j - 1) // 2)] = v
        d = self.degree
        return Jet2._raw(alpha, d, self.exact), Jet2._raw(beta, d, self.exact)

    def split_parity_x(self):
        """Write ``F(x, y) = alpha(x**2, y) + x * beta(x**2, y)``."""
        alpha, beta = {}, {}
        for (i, j), v in self._c.items():
            if i % 2 == 0:
                alpha[(i // 2, j)] = v
            else:
                beta[((i - 1) // 2, j)] = v
        d = self.degree
        return Jet2._raw(alpha, d, self.exact), Jet2._raw(beta, d, self.exact)

    def divide_x(self):
        """Exact quotient by ``x``; ``F(0, y)`` must vanish. Degree drops by one."""
        for (i, j), v in self._c.items():
            if i == 0 and not is_zero(v):
                raise NonUnitDivisor("F(0, y) is not identically zero")
        d = max(self.degree - 1, 0)
        return Jet2._raw({(i - 1, j): v for (i, j), v in self._c.items() if i > 0}, d, self.exact)

    def divide_y(self):
        for (i, j), v in self._c.items():
            if j == 0 and not is_zero(v):
                raise NonUnitDivisor("F(x, 0) is not identically zero")
        d = max(self.degree - 1, 0)
        return Jet2._raw({(i, j - 1): v for (i, j), v in self._c.items() if j > 0}, d, self.exact)

    def swap(self):
        """``(x, y) -> (y, x)``."""
        return Jet2._raw({(j, i): v for (i, j), v in self._c.items()}, self.degree, self.exact)

    def with_degree(self, degree):
        """Reinterpret the stored coefficients at another truncation degree (drops terms above it)."""
        return Jet2._raw({k: v for k, v in self._c.items() if k[0] + k[1] <= degree}, degree, self.exact)

    def max_abs(self):
        return max((abs(v) for v in self._c.values()), default=0)

    def is_zero_jet(self):
        return all(is_zero(v) for v in self._c.values())


def format_jet(jet, names=None):
    """Human-readable polynomial text, lowest degree first."""
    if isinstance(jet, Jet1):
        names = names or ("t",)
        items = [((k,), c) for k, c in enumerate(jet.coeffs) if c != 0]
    else:
        names = names or ("x", "y")
        items = sorted(jet.terms(), key=lambda kv: (kv[0][0] + kv[0][1], -kv[0][0]))
    if not items:
        return "0"
    parts = []
    for exps, c in items:
        mono = "*".join(
            n if e == 1 else f"{n}^{e}" for n, e in zip(names, exps) if e
        )
        cs = str(c)
        if mono:
            text = mono if c == 1 else (f"-{mono}" if c == -1 else f"{cs}*{mono}")
        else:
            text = cs
        parts.append(text)
    out = " + ".join(parts)
    return out.replace("+ -", "- ")


# ---------------------------------------------------------------------------
# operations


def ring_ops(a, b, op, p=None):
    """Dispatch ``add|sub|mul|div|sqrt_unit|rpow_unit`` (``b`` is ignored for unary ops)."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "sqrt_unit":
        return a.sqrt_unit()
    if op == "rpow_unit":
        if p is None:
            raise UsageError("rpow_unit needs an exponent")
        return a.rpow_unit(p)
    raise UsageError(f"unknown operation {op!r}")


def _require_based(inner):
    if not is_zero(inner.constant_term):
        raise InnerNotBased(f"inner series has nonzero constant term {inner.constant_term}")


def compose1(outer, inner):
    """``outer(inner)`` for a one-variable ``outer`` and a Jet1/Jet2 ``inner`` with zero constant term."""
    _require_based(inner)
    d = min(outer.degree, inner.degree)
    if outer.exact != inner.exact:
        outer, inner = outer.to_float(), inner.to_float()
    inner = inner.truncate(d)
    result = inner._const_like(outer[d])
    for k in range(d - 1, -1, -1):
        result = result * inner + outer[k]
    return result


def invert1(a):
    """Compositional inverse of a one-variable jet with ``a(0) = 0`` and ``a'(0) != 0``."""
    if not is_zero(a[0]):
        raise InnerNotBased("a(0) must vanish")
    c = a[1] if a.degree >= 1 else 0
    if is_zero(c):
        raise NotInvertible("a'(0) vanishes")
    d = a.degree
    t = Jet1.variable(d, a.exact)
    nonlin = a - t * c
    w = t / c
    for _ in range(d):
        w = (t - compose1(nonlin, w)) / c
    return w


def substitute2(F, g, h):
    """``F(g, h)``; ``g`` and ``h`` are Jet1 or Jet2 with zero constant terms."""
    _require_based(g)
    _require_based(h)
    if type(g) is not type(h):
        raise TypeError("inner series must be of the same kind")
    d = min(F.degree, g.degree, h.degree)
    exact = F.exact and g.exact and h.exact
    if not exact:
        F, g, h = F.to_float(), g.to_float(), h.to_float()
    g, h = g.truncate(d), h.truncate(d)
    rows = {}
    for (i, j), v in F.terms():
        if i + j <= d:
            rows.setdefault(i, {})[j] = v
    if not rows:
        return g._const_like(0)
    maxj = max(j for r in rows.values() for j in r)
    hp = [h._const_like(1)]
    for _ in range(maxj):
        hp.append(hp[-1] * h)
    zero = g._const_like(0)

    def row(i):
        acc = zero
        for j, v in rows.get(i, {}).items():
            acc = acc + hp[j] * v
        return acc

    top = max(rows)
    result = row(top)
    for i in range(top - 1, -1, -1):
        result = result * g + row(i)
    return result


def identity_map(degree=DEFAULT_DEGREE, exact=True):
    return Jet2.x(degree, exact), Jet2.y(degree, exact)


def compose_maps(outer, inner):
    """Componentwise ``outer o inner`` for plane map jets given as pairs."""
    g, h = inner
    return tuple(substitute2(c, g, h) for c in outer)


def _linear_part(pair):
    (a, b), (c, e) = pair[0].gradient_at_origin(), pair[1].gradient_at_origin()
    return a, b, c, e


def invert_map2(gamma):
    """Inverse jet of a plane map germ with invertible linear part."""
    g1, g2 = gamma
    _require_based(g1)
    _require_based(g2)
    d = min(g1.degree, g2.degree)
    exact = g1.exact and g2.exact
    if not exact:
        g1, g2 = g1.to_float(), g2.to_float()
    a, b, c, e = _linear_part((g1, g2))
    det = a * e - b * c
    if is_zero(det):
        raise SingularAtOrigin("Jacobian determinant vanishes at the origin")
    ia, ib, ic, ie = e / det, -b / det, -c / det, a / det
    X, Y = Jet2.x(d, exact), Jet2.y(d, exact)

    def apply_linv(p, q):
        return p * ia + q * ib, p * ic + q * ie

    # Newton step G <- G - DG (gamma o G - id): correct order doubles each pass.
    G = apply_linv(X, Y)
    k = 1
    while k < d:
        k = min(2 * k, d)
        Gk = (G[0].with_degree(k), G[1].with_degree(k))
        Xk, Yk = X.with_degree(k), Y.with_degree(k)
        e1 = substitute2(g1.with_degree(k), *Gk) - Xk
        e2 = substitute2(g2.with_degree(k), *Gk) - Yk
        p, q = Gk
        G = (
            p - (p.dx().with_degree(k) * e1 + p.dy().with_degree(k) * e2),
            q - (q.dx().with_degree(k) * e1 + q.dy().with_degree(k) * e2),
        )
    return tuple(comp.with_degree(d) for comp in G)


def implicit_solve(delta, solve_for="y"):
    """Solve ``delta(x, phi(x)) = 0`` (or ``delta(phi(y), y) = 0`` for ``solve_for='x'``)."""
    if not is_zero(delta.constant_term):
        raise ImplicitDegenerate("delta(0) != 0")
    if solve_for == "x":
        delta = delta.swap()
    elif solve_for != "y":
        raise UsageError("solve_for must be 'x' or 'y'")
    d = delta.degree
    a, b = delta.gradient_at_origin()
    if is_zero(b):
        raise ImplicitDegenerate(f"partial derivative along {solve_for} vanishes at 0")
    t = Jet1.variable(d, delta.exact)
    rest = delta - Jet2.y(d, delta.exact) * b
    phi = t * 0 - t * (a / b)
    for _ in range(d):
        phi = -substitute2(rest, t, phi) / b
    return phi


def weierstrass_divide(F, w):
    """Division with remainder: ``F(x, y) = A(w(x, y), y) + x * B(w(x, y), y)``.

    ``w`` must be x-regular of order two.  Coefficients are found degree by
    degree; inside each degree the system is triangular in the power of ``x``.
    """
    d = min(F.degree, w.degree)
    exact = F.exact and w.exact
    if not exact:
        F, w = F.to_float(), w.to_float()
    F, w = F.with_degree(d), w.with_degree(d)
    if not is_zero(w.constant_term) or not is_zero(w[(1, 0)]) or is_zero(w[(2, 0)]):
        raise NotXRegularOrder2("w must satisfy w(0)=0, w_x(0)=0, w_xx(0)!=0")
    X, Y = Jet2.x(d, exact), Jet2.y(d, exact)
    # Remove the pure-y part so the leading forms are triangular in x.
    P = w.restrict_y()
    Py = Jet2.from_jet1(P, "y", d)
    wt = w - Py
    c = wt[(2, 0)]
    wpow = [wt._const_like(1)]
    ypow = [Y._const_like(1)]
    for _ in range(d):
        wpow.append(wpow[-1] * wt)
        ypow.append(ypow[-1] * Y)
    A, B = {}, {}
    R = F
    for n in range(d + 1):
        for k in range(n, -1, -1):
            coef = R[(k, n - k)]
            if coef == 0:
                continue
            if k % 2 == 0:
                i, j = k // 2, n - k
                q = coef / c ** i
                A[(i, j)] = A.get((i, j), 0) + q
                R = R - wpow[i] * ypow[j] * q
            else:
                i, j = (k - 1) // 2, n - k
                q = coef / c ** i
                B[(i, j)] = B.get((i, j), 0) + q
                R = R - X * wpow[i] * ypow[j] * q
    At = Jet2(A, d)
    Bt = Jet2(B, d)
    if not exact:
        At, Bt = At.to_float(), Bt.to_float()
    # Undo the shear: A(u, v) = At(u - P(v), v).
    U, V = Jet2.x(d, exact), Jet2.y(d, exact)
    shift = U - Jet2.from_jet1(P, "y", d)
    return substitute2(At, shift, V), substitute2(Bt, shift, V)


# ---------------------------------------------------------------------------
# serialization


def jet_to_json(jet):
    """``{"vars": 1|2, "degree": d, "coeffs": [[i, j?, num, den] ...]}``; floats as decimal strings."""
    if isinstance(jet, Jet1):
        items = [((k,), c) for k, c in enumerate(jet.coeffs) if c != 0]
        nvars = 1
    else:
        items = sorted(jet.terms())
        nvars = 2
    coeffs = []
    for exps, c in items:
        if jet.exact:
            coeffs.append([*exps, int(c.numerator), int(c.denominator)])
        else:
            coeffs.append([*exps, repr(float(c))])
    return {"vars": nvars, "degree": jet.degree, "coeffs": coeffs}


def jet_from_json(obj):
    try:
        nvars = int(obj["vars"])
        degree = int(obj["degree"])
        raw = obj["coeffs"]
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed jet object: {exc}") from exc
    if nvars not in (1, 2):
        raise UsageError("vars must be 1 or 2")

    def value(rest):
        if len(rest) == 2:
            return mpq(int(rest[0]), int(rest[1]))
        if len(rest) == 1 and isinstance(rest[0], str):
            return float(rest[0])
        raise UsageError(f"bad coefficient entry {rest!r}")

    if nvars == 1:
        cs = [0] * (degree + 1)
        for entry in raw:
            k = int(entry[0])
            if k <= degree:
                cs[k] = value(entry[1:])
        return Jet1(cs, degree)
    return Jet2({(int(e[0]), int(e[1])): value(e[2:]) for e in raw}, degree)
