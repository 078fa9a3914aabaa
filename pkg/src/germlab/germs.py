"""Singularity tests for germs and classification of single and pair diagrams.

A single diagram is ``(R,0) <-f- (R^2,0) -gamma-> (R^2,0)``; a pair diagram
shares the target plane between two of them.  All decisions are made on jets.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

from .exceptions import (
    ContactExceedsDegree,
    DegenerateBranch,
    DegenerateCritical,
    GermlabError,
    ImplicitDegenerate,
    NoCriticalPoint,
    NoDoublePoints,
    NotFold,
    UnsupportedCombination,
    UsageError,
    ZeroCurve,
)
from .expr import parse, taylor
from .jets import (
    DEFAULT_DEGREE,
    Jet1,
    Jet2,
    compose1,
    compose_maps,
    implicit_solve,
    invert1,
    invert_map2,
    is_zero,
    substitute2,
)

__all__ = [
    "Check",
    "Classification",
    "ImplicitCurve",
    "PairDiagram",
    "ParamCurve",
    "SingleDiagram",
    "classify_pair",
    "classify_single",
    "contact_order",
    "criminant_curve",
    "criminant_function",
    "discriminant_curve",
    "double_point_curve",
    "function_class",
    "map_singularity_class",
    "normalize_fold",
    "tangent_cone",
]

PAIR_TAGS = (
    "(I,I)^0",
    "(I,I)^1",
    "(I,I)^2",
    "(II,I)",
    "(III,I)^0",
    "(III,I)^1",
    "(IV,I)",
    "(V,I)",
    "(VI,I)",
    "(III,III)",
)
SINGLE_TAGS = ("I", "II", "III", "IV", "V", "VI")


# ---------------------------------------------------------------------------
# data


def _jet2(obj, variables, degree, exact):
    if isinstance(obj, Jet2):
        return obj.with_degree(min(degree, obj.degree)) if degree is not None else obj
    if isinstance(obj, str):
        return taylor(parse(obj, variables), degree, exact)
    raise UsageError(f"expected an expression string or Jet2, got {type(obj).__name__}")


@dataclass(frozen=True)
class SingleDiagram:
    f: Jet2
    gamma: tuple

    def __post_init__(self):
        if len(self.gamma) != 2:
            raise UsageError("gamma must have two components")
        for name, comp in (("f", self.f), ("gamma[0]", self.gamma[0]), ("gamma[1]", self.gamma[1])):
            if not is_zero(comp.constant_term):
                raise UsageError(f"{name} does not vanish at the origin")

    @classmethod
    def from_text(cls, f, gamma, degree=DEFAULT_DEGREE, exact=True):
        fj = _jet2(f, ("x", "y"), degree, exact)
        g = tuple(_jet2(c, ("x", "y"), degree, exact) for c in gamma)
        return cls(fj, g)

    @property
    def degree(self):
        return min(self.f.degree, self.gamma[0].degree, self.gamma[1].degree)

    @property
    def exact(self):
        return self.f.exact and self.gamma[0].exact and self.gamma[1].exact


@dataclass(frozen=True)
class PairDiagram:
    first: SingleDiagram
    second: SingleDiagram

    @classmethod
    def from_text(cls, f1, gamma1, f2, gamma2, degree=DEFAULT_DEGREE, exact=True):
        return cls(
            SingleDiagram.from_text(f1, gamma1, degree, exact),
            SingleDiagram.from_text(f2, gamma2, degree, exact),
        )

    @property
    def degree(self):
        return min(self.first.degree, self.second.degree)


@dataclass
class Check:
    name: str
    passed: bool
    witness: object = None

    def to_json(self):
        w = self.witness
        if w is not None and not isinstance(w, (int, float, str, bool, list, dict)):
            w = str(w)
        return {"name": self.name, "passed": bool(self.passed), "witness": w}


@dataclass
class Classification:
    """Type tag plus the checks that led to it; ``tag == 'NONGENERIC'`` carries a reason."""

    tag: str
    checks: list = field(default_factory=list)
    reason: str | None = None

    @property
    def generic(self):
        return self.tag != "NONGENERIC"

    def __str__(self):
        return self.tag if self.generic else f"NONGENERIC({self.reason})"

    def to_json(self):
        out = {"type": self.tag, "checks": [c.to_json() for c in self.checks]}
        if self.reason:
            out["reason"] = self.reason
        return out


class _Fail(Exception):
    def __init__(self, reason):
        super().__init__(reason)
        self.reason = reason


def _require(checks, name, passed, witness=None):
    checks.append(Check(name, bool(passed), witness))
    if not passed:
        raise _Fail(name)


# ---------------------------------------------------------------------------
# germ-level tests


def _grad0(F):
    return F[(1, 0)], F[(0, 1)]


def _nonzero_vec(v):
    return any(not is_zero(c) for c in v)


def _det(gamma):
    g1, g2 = gamma
    return g1.dx() * g2.dy() - g1.dy() * g2.dx()


def _along(field_, F):
    a, b = field_
    return a * F.dx() + b * F.dy()


def _num(c):
    return str(c)


def map_singularity_class(gamma, detail=False):
    """``regular``, ``fold``, ``cusp`` or ``degenerate`` via the jet tests on ``det d(gamma)``."""
    g1, g2 = gamma
    delta = _det(gamma)
    info = {"det0": delta.constant_term}
    if not is_zero(delta.constant_term):
        return ("regular", info) if detail else "regular"
    grad = _grad0(delta)
    if _nonzero_vec(_grad0(g1)):
        v = (g1.dy(), -g1.dx())
    elif _nonzero_vec(_grad0(g2)):
        v = (g2.dy(), -g2.dx())
    else:
        info["reason"] = "rank zero differential"
        return ("degenerate", info) if detail else "degenerate"
    if not _nonzero_vec(grad):
        info["reason"] = "singular set is not smooth"
        return ("degenerate", info) if detail else "degenerate"
    vd = _along(v, delta)
    info["v_delta"] = vd.constant_term
    if not is_zero(vd.constant_term):
        return ("fold", info) if detail else "fold"
    vvd = _along(v, vd)
    info["v_v_delta"] = vvd.constant_term
    if not is_zero(vvd.constant_term):
        return ("cusp", info) if detail else "cusp"
    info["reason"] = "kernel field has higher contact with the singular set"
    return ("degenerate", info) if detail else "degenerate"


def function_class(f):
    if _nonzero_vec(_grad0(f)):
        return "submersion"
    (a, b), (_, c) = f.hessian_at_origin()
    if not is_zero(a * c - b * b):
        return "morse"
    return "degenerate"


def _rank2(rows):
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            (a, b), (c, d) = rows[i], rows[j]
            if not is_zero(a * d - b * c):
                return True
    return False


def _linear_rows(F):
    return F[(1, 0)], F[(0, 1)]


def normalize_fold(gamma):
    """Coordinates in which a fold becomes ``(x, y^2)``.

    Returns ``(H, K)``, source and target changes with ``K o gamma = (x, y^2) o H``
    to the jet degree.  No irrational constants are introduced.
    """
    g1, g2 = gamma
    d = min(g1.degree, g2.degree)
    exact = g1.exact and g2.exact
    if not exact:
        g1, g2 = g1.to_float(), g2.to_float()
    U, V = Jet2.x(d, exact), Jet2.y(d, exact)
    a, b = _grad0(g1), _grad0(g2)
    if _nonzero_vec(a):
        i = 0 if not is_zero(a[0]) else 1
        r = b[i] / a[i]
        T = (U, V - U * r)
    elif _nonzero_vec(b):
        T = (V, U)
    else:
        raise NotFold("differential vanishes at the origin")
    p, q = compose_maps(T, (g1, g2))
    if not is_zero(_det((p, q)).constant_term):
        raise NotFold("map is regular at the origin")
    X, Y = Jet2.x(d, exact), Jet2.y(d, exact)
    if not is_zero(p[(1, 0)]):
        S, other = (p, Y), Y
    else:
        S, other = (p, X), X
    Sinv = invert_map2(S)
    g = substitute2(q, *Sinv)
    gY = g.dy()
    if is_zero(gY[(0, 1)]):
        raise NotFold("second derivative along the kernel vanishes")
    y0 = implicit_solve(gY, "y")
    Y0 = Jet2.from_jet1(Jet1(y0.coeffs, d), "x", d)
    G = substitute2(g, X, Y + Y0) - substitute2(g, X, Y0)
    Q = G.divide_y().divide_y().with_degree(d)
    q0 = Q.constant_term
    R = (Q / q0).sqrt_unit()
    g0 = substitute2(g, X, Y0)
    K = (T[0], (T[1] - substitute2(g0, T[0], T[1])) / q0)
    eta = other - substitute2(Y0, p, other)
    H = (p, eta * substitute2(R, p, eta))
    return H, K


def discriminant_curve(gamma):
    """Image of the singular set, parametrized through an implicit solve of ``det d(gamma) = 0``."""
    delta = _det(gamma)
    d = delta.degree
    try:
        if not is_zero(delta[(0, 1)]):
            phi = implicit_solve(delta, "y")
            src = (Jet1.variable(d, delta.exact), phi)
        else:
            phi = implicit_solve(delta, "x")
            src = (phi, Jet1.variable(d, delta.exact))
    except ImplicitDegenerate as exc:
        raise DegenerateBranch(f"singular set is not a smooth curve: {exc}") from exc
    return ParamCurve(*(substitute2(c, *src) for c in gamma))


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class ParamCurve:
    """Plane curve ``s -> (u(s), v(s))`` through the origin."""

    u: Jet1
    v: Jet1

    def pushforward(self, gamma):
        return ParamCurve(substitute2(gamma[0], self.u, self.v), substitute2(gamma[1], self.u, self.v))


@dataclass(frozen=True)
class ImplicitCurve:
    """Plane curve ``{F = 0}``."""

    F: Jet2


def _parametrize(curve):
    F = curve.F
    d = F.degree
    t = Jet1.variable(d, F.exact)
    if not is_zero(F[(0, 1)]):
        return ParamCurve(t, implicit_solve(F, "y"))
    if not is_zero(F[(1, 0)]):
        return ParamCurve(implicit_solve(F, "x"), t)
    raise DegenerateBranch("implicit curve is singular at the origin")


def _implicitize(curve):
    u, v = curve.u, curve.v
    d = min(u.degree, v.degree)
    exact = u.exact and v.exact
    U, V = Jet2.x(d, exact), Jet2.y(d, exact)
    if not is_zero(u[1]):
        phi = compose1(v, invert1(u))
        return ImplicitCurve(V - Jet2.from_jet1(phi, "x", d))
    if not is_zero(v[1]):
        phi = compose1(u, invert1(v))
        return ImplicitCurve(U - Jet2.from_jet1(phi, "y", d))
    raise DegenerateBranch("parametrized curve is singular at the origin")


def contact_order(c1, c2):
    """Vanishing order of ``c2``'s defining function along ``c1``; 1 means transversal."""
    if isinstance(c1, ImplicitCurve):
        c1 = _parametrize(c1)
    if isinstance(c2, ParamCurve):
        c2 = _implicitize(c2)
    if not is_zero(c1.u.constant_term) or not is_zero(c1.v.constant_term):
        raise UsageError("curve does not pass through the origin")
    if c1.u.order() is None and c1.v.order() is None:
        raise ZeroCurve("parametrization is constant")
    val = substitute2(c2.F, c1.u, c1.v)
    k = val.order()
    if k is None:
        raise ContactExceedsDegree(f"contact persists to truncation degree {val.degree}")
    return k


def _leading_vector(curve):
    d = min(curve.u.degree, curve.v.degree)
    for k in range(1, d + 1):
        a, b = curve.u[k], curve.v[k]
        if not (is_zero(a) and is_zero(b)):
            return k, (a, b)
    raise ZeroCurve("curve vanishes to truncation degree")


def tangent_cone(curve):
    """Unit direction of the lowest-order nonvanishing term of a parametrized curve."""
    _, (a, b) = _leading_vector(curve)
    a, b = float(a), float(b)
    n = (a * a + b * b) ** 0.5
    return a / n, b / n


# ---------------------------------------------------------------------------
# fold-normalized data


@functools.lru_cache(maxsize=64)
def _fold_split(f, gamma):
    """``(H, K, alpha, beta)`` with ``f o H^-1 = alpha(x, y^2) + y beta(x, y^2)``."""
    H, K = normalize_fold(gamma)
    fn = substitute2(f, *invert_map2(H))
    alpha, beta = fn.split_parity_y()
    return H, K, alpha, beta


def double_point_curve(f, gamma):
    """Source curve of double points of ``(f, gamma)`` for a fold ``gamma``.

    Returns ``(branch, partner)``: two parametrized source curves with
    ``(f, gamma)(branch(s)) = (f, gamma)(partner(s))``.
    """
    H, _, _, beta = _fold_split(f, gamma)
    if beta.is_zero_jet():
        raise DegenerateBranch("f is even along the fold: the odd part vanishes identically")
    if not is_zero(beta.constant_term):
        raise NoDoublePoints("(f, gamma) is an immersion at the origin")
    d = beta.degree
    X, Y = Jet2.x(d, beta.exact), Jet2.y(d, beta.exact)
    g = substitute2(beta, X, Y * Y)
    try:
        psi = implicit_solve(g, "x")
    except ImplicitDegenerate as exc:
        raise DegenerateBranch(f"double-point branch is not smooth: {exc}") from exc
    s = Jet1.variable(d, beta.exact)
    Hinv = invert_map2(H)
    branch = (substitute2(Hinv[0], psi, s), substitute2(Hinv[1], psi, s))
    partner = (substitute2(Hinv[0], psi, -s), substitute2(Hinv[1], psi, -s))
    return ParamCurve(*branch), ParamCurve(*partner)


def _sheet_tangency(alpha, beta):
    """``alpha_u beta + 2 v (alpha_u beta_v - alpha_v beta_u)`` in normalized target coordinates."""
    d = alpha.degree
    V = Jet2.y(d, alpha.exact)
    au, av = alpha.dx(), alpha.dy()
    bu, bv = beta.dx(), beta.dy()
    return au * beta + V * (au * bv - av * bu) * 2


def criminant_function(f, gamma):
    """Defining function in target coordinates of the criminant of a fold diagram.

    It is the locus where the two sheets of ``f`` pushed forward by the fold
    are tangent, which is independent of coordinates.
    """
    _, K, alpha, beta = _fold_split(f, gamma)
    return substitute2(_sheet_tangency(alpha, beta), *K)


def criminant_curve(f, gamma):
    """Critical points of the fiber graphs of ``f``, pushed forward by ``gamma``.

    Returns ``(curve, level)``: the image curve and ``t = f`` along it, both
    parametrized by the free source coordinate of the critical set.
    """
    d = min(f.degree, gamma[0].degree, gamma[1].degree)
    fx, fy = f.dx(), f.dy()
    if not is_zero(f[(0, 1)]):
        crit = fx
    elif not is_zero(f[(1, 0)]):
        crit = fy
    else:
        raise UsageError("f is not a submersion")
    if not is_zero(crit.constant_term):
        raise NoCriticalPoint("fiber graphs are regular near the origin")
    s = Jet1.variable(d, f.exact)
    if not is_zero(crit[(1, 0)]):
        phi = implicit_solve(crit, "x")
        src = (Jet1(phi.coeffs, d), s)
    elif not is_zero(crit[(0, 1)]):
        phi = implicit_solve(crit, "y")
        src = (s, Jet1(phi.coeffs, d))
    else:
        raise DegenerateCritical("critical set is singular at the origin")
    curve = ParamCurve(*src).pushforward(gamma)
    level = substitute2(f, *src)
    return curve, level


# ---------------------------------------------------------------------------
# single diagrams


def _classify_single(d, checks):
    f, gamma = d.f, d.gamma
    fc = function_class(f)
    mc, info = map_singularity_class(gamma, detail=True)
    checks.append(Check("function class", True, fc))
    checks.append(Check("map class", True, mc))
    if mc == "regular":
        if fc == "submersion":
            return "I"
        if fc == "morse":
            return "II"
        _require(checks, "f submersion or Morse", False, fc)
    _require(checks, "f submersion", fc == "submersion", fc)
    if mc == "fold":
        _, _, alpha, beta = _fold_split(f, gamma)
        b0 = beta.constant_term
        if not is_zero(b0):
            checks.append(Check("(f, gamma) regular", True, _num(b0)))
            a1 = alpha[(1, 0)]
            if not is_zero(a1):
                checks.append(Check("f|S regular", True, _num(a1)))
                return "III"
            a2 = alpha[(2, 0)]
            _require(checks, "f|S regular or Morse", not is_zero(a2), _num(a2))
            return "IV"
        checks.append(Check("(f, gamma) regular", False, _num(b0)))
        bu = beta[(1, 0)]
        _require(checks, "Whitney umbrella", not is_zero(bu), _num(bu))
        psi = implicit_solve(beta, "x")
        slope = alpha[(1, 0)] * psi[1] + alpha[(0, 1)]
        _require(checks, "double-point line transversal to {0} x R^2", not is_zero(slope), _num(slope))
        return "V"
    if mc == "cusp":
        rows = [_linear_rows(f), _linear_rows(gamma[0]), _linear_rows(gamma[1])]
        _require(checks, "(f, gamma) regular", _rank2(rows))
        return "VI"
    _require(checks, "map is regular, fold or cusp", False, info.get("reason", mc))


def classify_single(d):
    checks = []
    try:
        return Classification(_classify_single(d, checks), checks)
    except _Fail as exc:
        return Classification("NONGENERIC", checks, exc.reason)
    except GermlabError as exc:
        checks.append(Check(type(exc).__name__, False, str(exc)))
        return Classification("NONGENERIC", checks, f"{type(exc).__name__}: {exc}")


# ---------------------------------------------------------------------------
# pairs


def _transversal_gradients(a, b):
    return not is_zero(a[0] * b[1] - a[1] * b[0])


def _zero_set_of_function_on_target(single):
    """``f o gamma^-1`` for a diagram with regular ``gamma``."""
    return substitute2(single.f, *invert_map2(single.gamma))


def _pair_checks(t1, t2, p, checks):
    a, b = p.first, p.second
    if t1 in ("I", "II") and t2 == "I":
        F = (_zero_set_of_function_on_target(a), _zero_set_of_function_on_target(b))
        cls = map_singularity_class(F)
        checks.append(Check("composite map class", True, cls))
        if t1 == "I":
            idx = {"regular": 0, "fold": 1, "cusp": 2}.get(cls)
            _require(checks, "composite regular, fold or cusp", idx is not None, cls)
            return f"(I,I)^{idx}"
        _require(checks, "composite is a fold", cls == "fold", cls)
        return "(II,I)"
    if t2 != "I" and not (t1 == "III" and t2 == "III"):
        raise UnsupportedCombination(f"no generic pair type ({t1},{t2})")
    if t1 == "III" and t2 == "III":
        k = contact_order(discriminant_curve(a.gamma), discriminant_curve(b.gamma))
        _require(checks, "discriminants transversal", k == 1, k)
        return "(III,III)"
    F2 = _zero_set_of_function_on_target(b)
    zero2 = ImplicitCurve(F2)
    g2 = _grad0(F2)
    if t1 == "VI":
        _, w = _leading_vector(discriminant_curve(a.gamma))
        dot = g2[0] * w[0] + g2[1] * w[1]
        _require(checks, "tangent cone of discriminant transversal to f2 zero set", not is_zero(dot), _num(dot))
        return "(VI,I)"
    k = contact_order(discriminant_curve(a.gamma), zero2)
    if t1 == "III":
        checks.append(Check("contact of discriminant with f2 zero set", k in (1, 2), k))
        if k == 1:
            return "(III,I)^0"
        if k == 2:
            return "(III,I)^1"
        raise _Fail("contact of discriminant with f2 zero set")
    _require(checks, "discriminant transversal to f2 zero set", k == 1, k)
    if t1 in ("IV", "V"):
        C = criminant_function(a.f, a.gamma)
        gc = _grad0(C)
        _require(checks, "criminant smooth", _nonzero_vec(gc), [_num(c) for c in gc])
        _require(checks, "criminant transversal to f2 zero set", _transversal_gradients(gc, g2))
        if t1 == "IV":
            return "(IV,I)"
        src = _parametrize(ImplicitCurve(a.f))
        _, w = _leading_vector(src.pushforward(a.gamma))
        dot = g2[0] * w[0] + g2[1] * w[1]
        _require(checks, "tangent cone of f1 zero set transversal to f2 zero set", not is_zero(dot), _num(dot))
        return "(V,I)"
    raise UnsupportedCombination(f"no generic pair type ({t1},{t2})")


def classify_pair(p):
    """Pair type of ``p``; component order matters."""
    s1, s2 = classify_single(p.first), classify_single(p.second)
    checks = [Check("first component", s1.generic, str(s1)), Check("second component", s2.generic, str(s2))]
    if not s1.generic:
        return Classification("NONGENERIC", checks, f"first component: {s1.reason}")
    if not s2.generic:
        return Classification("NONGENERIC", checks, f"second component: {s2.reason}")
    try:
        return Classification(_pair_checks(s1.tag, s2.tag, p, checks), checks)
    except _Fail as exc:
        return Classification("NONGENERIC", checks, exc.reason)
    except UnsupportedCombination:
        raise
    except GermlabError as exc:
        checks.append(Check(type(exc).__name__, False, str(exc)))
        return Classification("NONGENERIC", checks, f"{type(exc).__name__}: {exc}")
