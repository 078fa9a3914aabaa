"""Normal forms of generic pair diagrams and the reduction of type (III,III).

A :class:`Chain` ``(h, H1, K, H2, k)`` takes a pair diagram to another one with

    h o f1 = f1' o H1,   K o gamma1 = gamma1' o H1,
    K o gamma2 = gamma2' o H2,   k o f2 = f2' o H2.

Every reduction returns its chain, and :func:`verify_chain` measures how far
those four identities (six scalar equations) are from holding.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .exceptions import (
    BoundaryDegenerate,
    ContactExceedsDegree,
    DiscriminantsTangent,
    GermlabError,
    ModuliConstraintViolated,
    NonUnit,
    NotASolution,
    NotFold,
    UsageError,
    WrongType,
)
from .expr import parse, substitute, taylor, to_text
from .germs import (
    PAIR_TAGS,
    PairDiagram,
    SingleDiagram,
    classify_pair,
    contact_order,
    discriminant_curve,
    map_singularity_class,
    normalize_fold,
)
from .jets import (
    DEFAULT_DEGREE,
    Jet1,
    Jet2,
    compose1,
    compose_maps,
    exact_root,
    invert1,
    invert_map2,
    is_zero,
    jet_to_json,
    substitute2,
    weierstrass_divide,
)

__all__ = [
    "Chain",
    "NormalFormResult",
    "apply_chain",
    "b_invariant",
    "build_equivalence",
    "catalog",
    "compatible_diffeo",
    "moduli_residual",
    "pull_back",
    "random_chain",
    "reduce_III_III",
    "reduce_III_III_stage1",
    "reduce_fold_bigerm",
    "solve_moduli_formal",
    "verify_chain",
]


# ---------------------------------------------------------------------------
# chains


def _pad1(a, d):
    return a if a.degree == d else Jet1(a.coeffs, d)


def _pad2(pair, d):
    return tuple(c.with_degree(d) for c in pair)


@dataclass(frozen=True)
class Chain:
    h: Jet1
    H1: tuple
    K: tuple
    H2: tuple
    k: Jet1

    @classmethod
    def identity(cls, degree=DEFAULT_DEGREE, exact=True):
        t = Jet1.variable(degree, exact)
        X, Y = Jet2.x(degree, exact), Jet2.y(degree, exact)
        return cls(t, (X, Y), (X, Y), (X, Y), t)

    @property
    def degree(self):
        return min(
            self.h.degree,
            self.k.degree,
            *(c.degree for c in self.H1 + self.K + self.H2),
        )

    def then(self, other):
        """The chain that applies ``self`` first and ``other`` second."""
        return Chain(
            compose1(other.h, self.h),
            compose_maps(other.H1, self.H1),
            compose_maps(other.K, self.K),
            compose_maps(other.H2, self.H2),
            compose1(other.k, self.k),
        )

    def to_json(self):
        return {
            "h": jet_to_json(self.h),
            "H1": [jet_to_json(c) for c in self.H1],
            "K": [jet_to_json(c) for c in self.K],
            "H2": [jet_to_json(c) for c in self.H2],
            "k": jet_to_json(self.k),
        }


def apply_chain(pair, chain):
    """Image of ``pair`` under ``chain`` (requires inverting the source changes)."""
    H1i = invert_map2(chain.H1)
    H2i = invert_map2(chain.H2)
    a, b = pair.first, pair.second
    f1 = substitute2(compose1(chain.h, a.f), *H1i)
    g1 = compose_maps(compose_maps(chain.K, a.gamma), H1i)
    f2 = substitute2(compose1(chain.k, b.f), *H2i)
    g2 = compose_maps(compose_maps(chain.K, b.gamma), H2i)
    return PairDiagram(SingleDiagram(f1, g1), SingleDiagram(f2, g2))


def pull_back(pair, chain):
    """The pair that ``chain`` takes onto ``pair``; only compositions, no inverses."""
    H1i, Ki, H2i = chain.H1, chain.K, chain.H2
    a, b = pair.first, pair.second
    f1 = compose1(chain.h, substitute2(a.f, *H1i))
    g1 = compose_maps(Ki, compose_maps(a.gamma, H1i))
    f2 = compose1(chain.k, substitute2(b.f, *H2i))
    g2 = compose_maps(Ki, compose_maps(b.gamma, H2i))
    return PairDiagram(SingleDiagram(f1, g1), SingleDiagram(f2, g2))


def verify_chain(source, chain, target):
    """Largest coefficient of the six commutation residuals; exact zero means equivalence at jet level."""
    a, b = source.first, source.second
    a2, b2 = target.first, target.second
    res = [
        compose1(chain.h, a.f) - substitute2(a2.f, *chain.H1),
        compose1(chain.k, b.f) - substitute2(b2.f, *chain.H2),
    ]
    for s, t, H in ((a.gamma, a2.gamma, chain.H1), (b.gamma, b2.gamma, chain.H2)):
        lhs = compose_maps(chain.K, s)
        rhs = compose_maps(t, H)
        res.extend(l - r for l, r in zip(lhs, rhs))
    return max(r.max_abs() for r in res)


def _random_scalar(rng, exact, choices=(-1, Fraction(-1, 2), 0, 0, Fraction(1, 2), 1)):
    c = rng.choice(choices)
    return Fraction(c) if exact else float(c)


def _random_map(rng, degree, exact, nonlinear_degree):
    while True:
        lin = [[rng.choice((-2, -1, 1, 2)), rng.choice((-1, 0, 1))] for _ in range(2)]
        if rng.random() < 0.5:
            lin = [lin[1], lin[0]]
        if lin[0][0] * lin[1][1] - lin[0][1] * lin[1][0] != 0:
            break
    comps = []
    for r in range(2):
        c = {(1, 0): lin[r][0], (0, 1): lin[r][1]}
        for n in range(2, nonlinear_degree + 1):
            for i in range(n + 1):
                c[(i, n - i)] = _random_scalar(rng, exact)
        comps.append(Jet2(c, degree) if exact else Jet2(c, degree).to_float())
    return tuple(comps)


def _random_line(rng, degree, exact, nonlinear_degree):
    cs = [0, rng.choice((-2, -1, 1, 2))] + [_random_scalar(rng, exact) for _ in range(2, nonlinear_degree + 1)]
    j = Jet1(cs, degree)
    return j if exact else j.to_float()


def random_chain(rng=None, degree=DEFAULT_DEGREE, exact=True, nonlinear_degree=3):
    """Random chain of polynomial changes with invertible linear parts."""
    rng = rng if isinstance(rng, random.Random) else random.Random(rng)
    return Chain(
        _random_line(rng, degree, exact, nonlinear_degree),
        _random_map(rng, degree, exact, nonlinear_degree),
        _random_map(rng, degree, exact, nonlinear_degree),
        _random_map(rng, degree, exact, nonlinear_degree),
        _random_line(rng, degree, exact, nonlinear_degree),
    )


# ---------------------------------------------------------------------------
# catalog


def _modulus(obj, variables, degree, exact, name):
    if obj is None:
        return Jet2.zero(degree, exact)
    if isinstance(obj, Jet2):
        return obj.with_degree(degree)
    if isinstance(obj, str):
        return taylor(parse(obj, variables), degree, exact)
    raise UsageError(f"{name} must be an expression or a Jet2")


def _vanishes_on_x_axis(theta):
    return all(is_zero(v) for (i, j), v in theta.terms() if j == 0)


def _vanishes_on_y_axis(theta):
    return all(is_zero(v) for (i, j), v in theta.terms() if i == 0)


def _check_theta(tag, theta):
    if not is_zero(theta.constant_term):
        raise ModuliConstraintViolated(f"{tag}: theta(0) = 0 required")
    if not _vanishes_on_x_axis(theta):
        raise ModuliConstraintViolated(f"{tag}: theta(x, 0) = 0 required")
    ty = theta[(0, 1)]
    if tag in ("(III,I)^1", "(IV,I)", "(V,I)") and is_zero(ty):
        raise ModuliConstraintViolated(f"{tag}: d(theta)/dy(0) != 0 required")
    if tag == "(V,I)" and is_zero(ty - 3):
        raise ModuliConstraintViolated(f"{tag}: d(theta)/dy(0) = 3 forbidden")


def catalog(tag, theta=None, alpha=None, sign=1, degree=DEFAULT_DEGREE, exact=True, validate=True):
    """Template pair diagram of type ``tag`` with the given moduli substituted.

    ``theta`` is a germ in ``(x, y)``; ``alpha`` (type (VI,I) only) is a germ in
    ``(u, v)``; ``sign`` picks ``x^2 + y^2`` or ``x^2 - y^2`` for (II,I).
    With ``validate=False`` the side conditions on the moduli are skipped, so
    degenerate members of a family can be built on purpose.
    """
    if tag not in PAIR_TAGS:
        raise UsageError(f"unknown pair type {tag!r}")
    d = degree
    X, Y = Jet2.x(d, exact), Jet2.y(d, exact)
    ident = (X, Y)
    th = _modulus(theta, ("x", "y"), d, exact, "theta")
    fold1, fold2 = (X, Y * Y), (X * X, Y)
    if validate and tag in ("(I,I)^0", "(I,I)^1", "(I,I)^2", "(II,I)") and not th.is_zero_jet():
        raise ModuliConstraintViolated(f"{tag} has no functional modulus")
    if validate and tag != "(VI,I)" and alpha is not None:
        raise ModuliConstraintViolated(f"{tag} takes no alpha")
    if tag == "(I,I)^0":
        return PairDiagram(SingleDiagram(Y, ident), SingleDiagram(X, ident))
    if tag == "(I,I)^1":
        return PairDiagram(SingleDiagram(Y, ident), SingleDiagram(X * X + Y, ident))
    if tag == "(I,I)^2":
        return PairDiagram(SingleDiagram(Y, ident), SingleDiagram(X ** 3 + X * Y + Y, ident))
    if tag == "(II,I)":
        if sign not in (1, -1):
            raise UsageError("sign must be +1 or -1")
        return PairDiagram(SingleDiagram(X * X + Y * Y * sign, ident), SingleDiagram(X, ident))
    if tag == "(III,III)":
        if validate and not (is_zero(th.constant_term) and _vanishes_on_x_axis(th) and _vanishes_on_y_axis(th)):
            raise ModuliConstraintViolated("(III,III): theta(x, 0) = theta(0, y) = 0 required")
        return PairDiagram(SingleDiagram(X + Y, fold1), SingleDiagram(X + Y + th, fold2))
    if validate:
        _check_theta(tag, th)
    if tag == "(III,I)^0":
        return PairDiagram(SingleDiagram(X + Y, fold1), SingleDiagram(X + th, ident))
    if tag == "(III,I)^1":
        return PairDiagram(SingleDiagram(X + Y, fold1), SingleDiagram(X * X + th, ident))
    if tag == "(IV,I)":
        return PairDiagram(SingleDiagram(X * X + Y, fold1), SingleDiagram(X + th, ident))
    if tag == "(V,I)":
        return PairDiagram(SingleDiagram(X + X * Y + Y ** 3, fold1), SingleDiagram(X + th, ident))
    # (VI,I)
    al = _modulus(alpha, ("u", "v"), d, exact, "alpha")
    if validate and not is_zero(al.constant_term):
        raise ModuliConstraintViolated("(VI,I): alpha(0) = 0 required")
    cusp = (X, Y ** 3 + X * Y)
    return PairDiagram(SingleDiagram(Y + substitute2(al, *cusp), cusp), SingleDiagram(X + th, ident))


def catalog_text(tag, theta="0", alpha="0", sign=1):
    """The same templates as :func:`catalog`, as expression text.

    Returns ``{"f1", "gamma1", "f2", "gamma2"}``; moduli are not validated.
    """
    if tag not in PAIR_TAGS:
        raise UsageError(f"unknown pair type {tag!r}")
    th = f"({to_text(parse(theta, ('x', 'y')).root)})"
    ident = ["x", "y"]
    fold1, fold2 = ["x", "y^2"], ["x^2", "y"]
    s = "+" if sign == 1 else "-"
    forms = {
        "(I,I)^0": ("y", ident, "x", ident),
        "(I,I)^1": ("y", ident, "x^2 + y", ident),
        "(I,I)^2": ("y", ident, "x^3 + x*y + y", ident),
        "(II,I)": (f"x^2 {s} y^2", ident, "x", ident),
        "(III,III)": ("x + y", fold1, f"x + y + {th}", fold2),
        "(III,I)^0": ("x + y", fold1, f"x + {th}", ident),
        "(III,I)^1": ("x + y", fold1, f"x^2 + {th}", ident),
        "(IV,I)": ("x^2 + y", fold1, f"x + {th}", ident),
        "(V,I)": ("x + x*y + y^3", fold1, f"x + {th}", ident),
    }
    if tag in forms:
        f1, g1, f2, g2 = forms[tag]
    else:
        al = substitute(parse(alpha, ("u", "v")), {"u": "x", "v": "y^3 + x*y"}, ("x", "y"))
        f1, g1, f2, g2 = f"y + ({to_text(al.root)})", ["x", "y^3 + x*y"], f"x + {th}", ident
    return {"f1": f1, "gamma1": list(g1), "f2": f2, "gamma2": list(g2)}


# ---------------------------------------------------------------------------
# fold bi-germs


def compatible_diffeo(A, B):
    """``(H1, K, H2)`` preserving both ``(x, y^2)`` and ``(x^2, y)`` for units ``A``, ``B``."""
    if is_zero(A.constant_term) or is_zero(B.constant_term):
        raise NonUnit("A and B must be units")
    d = min(A.degree, B.degree)
    exact = A.exact and B.exact
    X, Y = Jet2.x(d, exact), Jet2.y(d, exact)
    A2, B2 = A * A, B * B
    g1, g2 = (X, Y * Y), (X * X, Y)
    H1 = (X * substitute2(A2, *g1), Y * substitute2(B, *g1))
    K = (X * A2, Y * B2)
    H2 = (X * substitute2(A, *g2), Y * substitute2(B2, *g2))
    return H1, K, H2


def _is_standard(gamma, which):
    d = min(c.degree for c in gamma)
    exact = all(c.exact for c in gamma)
    X, Y = Jet2.x(d, exact), Jet2.y(d, exact)
    target = (X, Y * Y) if which == 1 else (X * X, Y)
    return all((c - t).is_zero_jet() for c, t in zip(gamma, target))


def reduce_fold_bigerm(gamma1, gamma2):
    """Chain (with trivial ``h``, ``k``) taking two folds to ``(x, y^2)`` and ``(x^2, y)``."""
    for g in (gamma1, gamma2):
        if map_singularity_class(g) != "fold":
            raise NotFold("both maps must be folds")
    try:
        k = contact_order(discriminant_curve(gamma1), discriminant_curve(gamma2))
    except ContactExceedsDegree as exc:
        raise DiscriminantsTangent(f"discriminant images coincide: {exc}") from exc
    if k != 1:
        raise DiscriminantsTangent("discriminant images are tangent")
    d = min(c.degree for c in gamma1 + gamma2)
    exact = all(c.exact for c in gamma1 + gamma2)
    X, Y = Jet2.x(d, exact), Jet2.y(d, exact)
    H1, K1 = normalize_fold(gamma1)
    H1, K1 = _pad2(H1, d), _pad2(K1, d)
    g2 = compose_maps(K1, gamma2)
    w = g2[1]
    if not is_zero(w[(1, 0)]):
        Ha = (Y, w)
    elif not is_zero(w[(0, 1)]):
        Ha = (X, w)
    else:
        raise DiscriminantsTangent("second fold has no transversal coordinate")
    U = substitute2(g2[0], *invert_map2(Ha))
    try:
        A, B = weierstrass_divide(X * X, U)
    except GermlabError as exc:
        raise NotFold(f"second fold is not x-regular after normalization: {exc}") from exc
    B = B / 2
    C = (A + B * B).with_degree(d)
    if is_zero(C[(1, 0)]):
        raise DiscriminantsTangent("discriminant images are tangent")
    phi1 = (substitute2(C, X, Y * Y), Y)
    psi = (C, Y)
    phi2 = (X - substitute2(B, U, Y).with_degree(d), Y)
    t = Jet1.variable(d, exact)
    return Chain(
        t,
        _pad2(compose_maps(phi1, H1), d),
        _pad2(compose_maps(psi, K1), d),
        _pad2(compose_maps(phi2, Ha), d),
        t,
    )


# ---------------------------------------------------------------------------
# (III,III) reduction


def _standard_pair(f1, f2, d, exact):
    X, Y = Jet2.x(d, exact), Jet2.y(d, exact)
    return PairDiagram(SingleDiagram(f1, (X, Y * Y)), SingleDiagram(f2, (X * X, Y)))


def _real_cbrt(r, exact):
    if exact:
        return exact_root(r, 3)
    return (abs(r) ** (1.0 / 3.0)) * (1 if r >= 0 else -1)


def reduce_III_III_stage1(pair):
    """Make ``f1 = x + y`` and give ``f2`` the linear part ``x + y``, keeping both folds standard.

    Returns ``(f, chain)`` where ``f`` is the new second function.
    """
    a, b = pair.first, pair.second
    if not (_is_standard(a.gamma, 1) and _is_standard(b.gamma, 2)):
        raise WrongType("maps must already be (x, y^2) and (x^2, y)")
    d = pair.degree
    exact = a.exact and b.exact
    X, Y = Jet2.x(d, exact), Jet2.y(d, exact)
    t = Jet1.variable(d, exact)
    f1 = a.f.with_degree(d)
    r = f1.restrict_y()
    if is_zero(r[1]):
        raise WrongType("(f1, gamma1) is not regular")
    h0 = invert1(r)
    alpha, beta = compose1(h0, f1).split_parity_y()
    at = alpha.divide_x().with_degree(d)
    if is_zero(at.constant_term):
        raise WrongType("f1 restricted to the singular set is not regular")
    s = 1 / at.constant_term
    h = h0 * s
    A = (at * s).sqrt_unit()
    H1, K, H2 = compatible_diffeo(A, beta * s)
    step1 = Chain(h, H1, K, H2, t)
    f = substitute2(b.f.with_degree(d), *invert_map2(H2))
    p, q = f[(1, 0)], f[(0, 1)]
    if is_zero(p) or is_zero(q):
        raise WrongType("second function does not have both linear coefficients")
    c = _real_cbrt(q / p, exact)
    c2, c4 = c * c, c ** 4
    step2 = Chain(t * c2, (X * c2, Y * c2), (X * c2, Y * c4), (X * c, Y * c4), t * (c / p))
    f = compose1(step2.k, substitute2(f, X / c, Y / c4))
    return f, step1.then(step2)


def b_invariant(f):
    """``b`` with ``f(0, .)^-1 o f(., 0) = t b(t)``; its degree is one less than ``f``'s."""
    rx, ry = f.restrict_x(), f.restrict_y()
    if is_zero(rx[1]) or is_zero(ry[1]):
        raise BoundaryDegenerate("boundary restrictions must have nonzero linear terms")
    return compose1(invert1(ry), rx).shift_down(1)


def moduli_residual(a, b):
    """Coefficients of ``a(t^4) - b(t)^2 a(t b(t))^4``."""
    d = min(a.degree, b.degree)
    t = Jet1.variable(d, a.exact and b.exact)
    a, b = _pad1(a, d), _pad1(b, d)
    return compose1(a, t ** 4) - b * b * compose1(a ** 4, t * b)


def solve_moduli_formal(b, degree=None):
    """Formal solution ``a`` with ``a(0) = 1`` of ``a(t^4) = b(t)^2 a(t b(t))^4``."""
    if not (b.constant_term == 1 or (not b.exact and is_zero(b.constant_term - 1))):
        raise UsageError("b(0) must be 1")
    N = b.degree if degree is None else degree
    b = _pad1(b, N)
    one = b.constant_term * 0 + 1
    coeffs = [one] + [one * 0] * N
    for k in range(1, N + 1):
        t = Jet1.variable(k, b.exact)
        bk = b.truncate(k)
        trial = Jet1(coeffs[:k], k)
        rhs = bk * bk * compose1(trial ** 4, t * bk)
        lhs = coeffs[k // 4] if k % 4 == 0 else 0
        coeffs[k] = (lhs - rhs[k]) / 4
    return Jet1(coeffs, N)


def build_equivalence(f, a):
    """Chain fixing ``x + y`` and both folds that normalizes ``f`` along the axes.

    Returns ``(chain, f_tilde)`` with ``f_tilde(x, 0) = x`` and ``f_tilde(0, y) = y``.
    """
    d = f.degree
    exact = f.exact and a.exact
    b = b_invariant(f)
    res = moduli_residual(a, b)
    if not res.is_zero_jet():
        raise NotASolution("a does not solve the functional equation for b(f)")
    a = _pad1(a, d)
    X, Y = Jet2.x(d, exact), Jet2.y(d, exact)
    t = Jet1.variable(d, exact)
    h = t * compose1(a, t * t)
    al, be = compose1(h, X + Y).split_parity_y()
    A = al.divide_x().with_degree(d).sqrt_unit()
    # be(0, v) only carries a(v) up to degree d/2; restore the full jet so the
    # y-axis comes out normalized as well.
    B = be - Jet2.from_jet1(be.restrict_y(), "y", d) + Jet2.from_jet1(a, "y", d)
    H1, K, H2 = compatible_diffeo(A, B)
    g = t * compose1(a, t ** 4).sqrt_unit()
    k = compose1(g, invert1(f.restrict_x()))
    chain = Chain(h, H1, K, H2, k)
    ft = compose1(k, substitute2(f, *invert_map2(H2)))
    return chain, ft


@dataclass
class NormalFormResult:
    pair_type: str
    theta: Jet2
    chain: Chain
    output: PairDiagram
    b: Jet1 | None = None
    a: Jet1 | None = None
    alpha: Jet2 | None = None

    def to_json(self):
        out = {"type": self.pair_type, "theta": jet_to_json(self.theta), "chain": self.chain.to_json()}
        if self.alpha is not None:
            out["alpha"] = jet_to_json(self.alpha)
        if self.b is not None:
            out["b"] = jet_to_json(self.b)
        if self.a is not None:
            out["a"] = jet_to_json(self.a)
        return out


def reduce_III_III(pair, check_type=True):
    """Reduce a (III,III) pair to ``x + y + theta`` with ``theta`` vanishing on both axes."""
    if check_type:
        cls = classify_pair(pair)
        if cls.tag != "(III,III)":
            raise WrongType(f"expected (III,III), got {cls}")
    d = pair.degree
    exact = pair.first.exact and pair.second.exact
    cA = reduce_fold_bigerm(pair.first.gamma, pair.second.gamma)
    mid = apply_chain(pair, cA)
    if not (_is_standard(mid.first.gamma, 1) and _is_standard(mid.second.gamma, 2)):
        raise NotFold("fold normalization did not reach the standard bi-germ")
    mid = _standard_pair(mid.first.f, mid.second.f, d, exact)
    f, cB = reduce_III_III_stage1(mid)
    b = b_invariant(f)
    a = solve_moduli_formal(b)
    cE, ft = build_equivalence(f, a)
    X, Y = Jet2.x(d, exact), Jet2.y(d, exact)
    theta = ft - X - Y
    chain = cA.then(cB).then(cE)
    out = _standard_pair(X + Y, ft, d, exact)
    return NormalFormResult("(III,III)", theta, chain, out, b=b, a=a)
