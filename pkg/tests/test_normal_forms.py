import random
from fractions import Fraction

import pytest
import sympy as sp

from conftest import random_jet2, series1, t_, to_sympy
from germlab.exceptions import (
    BoundaryDegenerate,
    DiscriminantsTangent,
    InexactRootError,
    ModuliConstraintViolated,
    NonUnit,
    NotASolution,
    NotFold,
    UsageError,
    WrongType,
)
from germlab.expr import parse, taylor
from germlab.germs import PAIR_TAGS, PairDiagram, SingleDiagram, classify_pair
from germlab.jets import Jet1, Jet2, compose1, compose_maps
from germlab.normal_forms import (
    Chain,
    apply_chain,
    b_invariant,
    build_equivalence,
    catalog,
    catalog_text,
    compatible_diffeo,
    moduli_residual,
    pull_back,
    random_chain,
    reduce_fold_bigerm,
    reduce_III_III,
    reduce_III_III_stage1,
    solve_moduli_formal,
    verify_chain,
)

D = 10


def j2(text, d=D):
    return taylor(parse(text, ("x", "y")), d)


def standard(f1, f2, d=D):
    X, Y = Jet2.x(d), Jet2.y(d)
    return PairDiagram(SingleDiagram(f1, (X, Y * Y)), SingleDiagram(f2, (X * X, Y)))


def same(a, b):
    return all((p - q).is_zero_jet() for p, q in zip(a, b))


# catalog


def test_catalog_I_I_2():
    p = catalog("(I,I)^2", degree=D)
    assert same((p.first.f,), (j2("y"),)) and same(p.first.gamma, (j2("x"), j2("y")))
    assert same((p.second.f,), (j2("x^3 + x*y + y"),))


def test_catalog_III_III_zero_theta():
    p = catalog("(III,III)", theta="0", degree=D)
    assert same((p.first.f, p.second.f), (j2("x + y"), j2("x + y")))
    assert same(p.first.gamma, (j2("x"), j2("y^2")))
    assert same(p.second.gamma, (j2("x^2"), j2("y")))


def test_catalog_forbidden_slope():
    with pytest.raises(ModuliConstraintViolated, match=r"\(V,I\): d\(theta\)/dy\(0\) = 3 forbidden"):
        catalog("(V,I)", theta="3*y + x*y")


@pytest.mark.parametrize(
    "tag,kw",
    [
        ("(IV,I)", {"theta": "x*y"}),
        ("(III,I)^0", {"theta": "x^2"}),
        ("(III,III)", {"theta": "x^2*y + y^2"}),
        ("(I,I)^0", {"theta": "x*y"}),
        ("(VI,I)", {"alpha": "1 + u"}),
        ("(IV,I)", {"theta": "y", "alpha": "u"}),
    ],
)
def test_catalog_constraints(tag, kw):
    with pytest.raises(ModuliConstraintViolated):
        catalog(tag, **kw)


def test_catalog_validate_off_builds_degenerate_member():
    p = catalog("(IV,I)", theta="y^2", validate=False, degree=D)
    assert classify_pair(p).tag == "NONGENERIC"


def test_catalog_unknown_tag():
    with pytest.raises(UsageError):
        catalog("(IV,III)")


@pytest.mark.parametrize("tag", PAIR_TAGS)
def test_catalog_text_matches_catalog(tag):
    kw = {"theta": "x*y"} if tag == "(III,III)" else {}
    if tag in ("(III,I)^1", "(IV,I)", "(V,I)"):
        kw = {"theta": "y + x*y"}
    if tag == "(VI,I)":
        kw = {"alpha": "u*v + v^2"}
    text = catalog_text(tag, **kw)
    got = PairDiagram.from_text(text["f1"], text["gamma1"], text["f2"], text["gamma2"], degree=D)
    assert verify_chain(got, Chain.identity(D), catalog(tag, degree=D, **kw)) == 0


# fold bi-germs


def test_reduce_fold_bigerm_identity():
    X, Y = Jet2.x(D), Jet2.y(D)
    chain = reduce_fold_bigerm((X, Y * Y), (X * X, Y))
    ident = Chain.identity(D)
    for a, b in zip(chain.H1 + chain.K + chain.H2, ident.H1 + ident.K + ident.H2):
        assert (a - b).is_zero_jet()


def _check_bigerm(g1, g2):
    chain = reduce_fold_bigerm(g1, g2)
    X, Y = Jet2.x(D), Jet2.y(D)
    src = PairDiagram(SingleDiagram(X, g1), SingleDiagram(X, g2))
    out = apply_chain(src, chain)
    assert same(out.first.gamma, (X, Y * Y))
    assert same(out.second.gamma, (X * X, Y))
    assert verify_chain(src, chain, out) == 0


def test_reduce_fold_bigerm_example():
    _check_bigerm(
        (j2("x"), j2("y^2")),
        (j2("(x + x^2)^2"), j2("y")),
    )


def test_reduce_fold_bigerm_random(rng):
    for _ in range(3):
        c = random_chain(rng, degree=D, nonlinear_degree=2)
        X, Y = Jet2.x(D), Jet2.y(D)
        p = pull_back(standard(X, X), c)
        _check_bigerm(p.first.gamma, p.second.gamma)
    _check_bigerm((j2("x"), j2("y^2 + x*y")), (j2("x^2 + y^3"), j2("y + x*y")))


def test_reduce_fold_bigerm_errors():
    with pytest.raises(NotFold):
        reduce_fold_bigerm((j2("x"), j2("y")), (j2("x^2"), j2("y")))
    with pytest.raises(DiscriminantsTangent):
        reduce_fold_bigerm((j2("x"), j2("y^2")), (j2("x"), j2("(y + x)^2 + x^2")))
    with pytest.raises(DiscriminantsTangent):
        reduce_fold_bigerm((j2("x"), j2("y^2")), (j2("x"), j2("(y + x)^2")))


def test_compatible_diffeo_identity():
    one = Jet2({(0, 0): 1}, D)
    H1, K, H2 = compatible_diffeo(one, one)
    X, Y = Jet2.x(D), Jet2.y(D)
    assert same(H1, (X, Y)) and same(K, (X, Y)) and same(H2, (X, Y))


def _compatible(A, B):
    H1, K, H2 = compatible_diffeo(A, B)
    X, Y = Jet2.x(D), Jet2.y(D)
    g1, g2 = (X, Y * Y), (X * X, Y)
    assert same(compose_maps(g1, H1), compose_maps(K, g1))
    assert same(compose_maps(g2, H2), compose_maps(K, g2))


def test_compatible_diffeo_examples(rng):
    _compatible(j2("1 + x"), j2("1"))
    for _ in range(3):
        A = random_jet2(rng, D, based=False, max_order=3)
        B = random_jet2(rng, D, based=False, max_order=3)
        A, B = A - A.constant_term + 2, B - B.constant_term - 1
        _compatible(A, B)


def test_compatible_diffeo_nonunit():
    with pytest.raises(NonUnit):
        compatible_diffeo(j2("x"), j2("1"))


# (III,III) stage one


def test_stage1_already_in_shape():
    p = catalog("(III,III)", theta="x*y", degree=D)
    f, chain = reduce_III_III_stage1(p)
    assert (f - j2("x + y + x*y")).is_zero_jet()
    assert verify_chain(p, chain, p) == 0


@pytest.mark.parametrize("f1,f2", [("x + y", "8*x + y + y^2"), ("x + y", "-x + y + x*y"), ("y - x", "-x - y")])
def test_stage1_scaling(f1, f2):
    p = standard(j2(f1), j2(f2))
    f, chain = reduce_III_III_stage1(p)
    assert f[(1, 0)] == 1 and f[(0, 1)] == 1
    assert verify_chain(p, chain, standard(j2("x + y"), f)) == 0


@pytest.mark.parametrize("f1,f2", [("2*x + y + x^2", "x + y"), ("x + y", "3*x + y + y^2"), ("x + y", "-x + 2*y + x*y")])
def test_stage1_scaling_irrational_roots(f1, f2):
    with pytest.raises(InexactRootError):
        reduce_III_III_stage1(standard(j2(f1), j2(f2)))
    X, Y = Jet2.x(D, False), Jet2.y(D, False)
    fl = [taylor(parse(t, ("x", "y")), D, exact=False) for t in (f1, f2)]
    p = PairDiagram(SingleDiagram(fl[0], (X, Y * Y)), SingleDiagram(fl[1], (X * X, Y)))
    f, chain = reduce_III_III_stage1(p)
    assert f[(1, 0)] == pytest.approx(1, abs=1e-14) and f[(0, 1)] == pytest.approx(1, abs=1e-14)
    out = PairDiagram(SingleDiagram(X + Y, (X, Y * Y)), SingleDiagram(f, (X * X, Y)))
    assert verify_chain(p, chain, out) < 1e-12


def test_stage1_wrong_shape():
    with pytest.raises(WrongType):
        reduce_III_III_stage1(catalog("(III,I)^0", degree=D))
    with pytest.raises(WrongType):
        reduce_III_III_stage1(standard(j2("x + y"), j2("x + x*y")))


# boundary invariant and the formal functional equation


def test_b_invariant_examples():
    assert b_invariant(j2("x + y")).coeffs == (1,) + (0,) * (D - 1)
    assert b_invariant(j2("x + y + x^2")).coeffs[:3] == (1, 1, 0)
    assert b_invariant(j2("x + y + y^2", 4)).coeffs == (1, -1, 2, -5)


def test_b_invariant_sympy_oracle():
    f = j2("x + y + x^2 - 2*y^3 + x*y + x^3")
    # fixed-point series reversion of f(0, t) = t - 2t^3
    ry = t_ - 2 * t_**3
    inv = sp.Integer(0)
    for _ in range(D + 1):
        inv = sp.expand(t_ - (ry.subs(t_, inv) - inv))
        inv = series1(inv, D + 1)
    want = series1(inv.subs(t_, t_ + t_**2 + t_**3), D)
    got = to_sympy(b_invariant(f))
    assert sp.expand(got * t_ - sum(want.coeff(t_, k) * t_**k for k in range(D + 1))) == 0


def test_b_invariant_degenerate():
    with pytest.raises(BoundaryDegenerate):
        b_invariant(j2("x + y^2"))


def test_solve_moduli_formal_examples():
    one = Jet1([1] + [0] * 8, 8)
    assert solve_moduli_formal(one).coeffs == one.coeffs
    a = solve_moduli_formal(Jet1([1, 1] + [0] * 7, 8))
    assert a[0] == 1 and a[1] == Fraction(-1, 2)
    assert moduli_residual(a, Jet1([1, 1] + [0] * 7, 8)).is_zero_jet()


def test_solve_moduli_formal_random(rng):
    for _ in range(4):
        b = Jet1([1] + [Fraction(rng.randint(-3, 3), rng.choice((1, 2))) for _ in range(12)], 12)
        a = solve_moduli_formal(b)
        assert a[0] == 1
        assert moduli_residual(a, b).is_zero_jet()


def test_solve_moduli_formal_brute_force():
    # undetermined coefficients solved one at a time by sympy
    N = 6
    cs = sp.symbols(f"a1:{N + 1}")
    a = 1 + sum(c * t_ ** (k + 1) for k, c in enumerate(cs))
    b = 1 + t_ - t_**2 / 2
    expr = sp.expand(a.subs(t_, t_**4) - b**2 * a.subs(t_, t_ * b) ** 4)
    sol = {}
    for k in range(1, N + 1):
        eq = sp.expand(expr.coeff(t_, k).subs(sol))
        sol[cs[k - 1]] = sp.solve(eq, cs[k - 1])[0]
    got = solve_moduli_formal(Jet1([1, 1, Fraction(-1, 2)] + [0] * (N - 2), N))
    assert [sp.Rational(int(c.numerator), int(c.denominator)) for c in got.coeffs[1:]] == [sol[c] for c in cs]


def test_solve_moduli_formal_needs_unit_b():
    with pytest.raises(UsageError):
        solve_moduli_formal(Jet1([2, 1], 4))


# boundary normalization


def _boundary_ok(ft):
    t = Jet1.variable(ft.degree)
    return (ft.restrict_x() - t).is_zero_jet() and (ft.restrict_y() - t).is_zero_jet()


def test_build_equivalence_identity():
    chain, ft = build_equivalence(j2("x + y"), Jet1([1] + [0] * D, D))
    ident = Chain.identity(D)
    assert (chain.h - ident.h).is_zero_jet() and (chain.k - ident.k).is_zero_jet()
    assert same(chain.H1 + chain.K + chain.H2, ident.H1 + ident.K + ident.H2)
    assert (ft - j2("x + y")).is_zero_jet()


def test_build_equivalence_x_squared():
    d = 12
    f = j2("x + y + x^2", d)
    a = solve_moduli_formal(b_invariant(f), d)
    chain, ft = build_equivalence(f, a)
    assert _boundary_ok(ft)
    assert verify_chain(standard(j2("x + y", d), f, d), chain, standard(j2("x + y", d), ft, d)) == 0


def test_build_equivalence_mixed_term():
    chain, ft = build_equivalence(j2("x + y + x*y"), Jet1([1] + [0] * D, D))
    assert (chain.k - Jet1.variable(D)).is_zero_jet()
    assert (ft - j2("x + y + x*y")).is_zero_jet()


def test_build_equivalence_rejects_non_solution():
    with pytest.raises(NotASolution):
        build_equivalence(j2("x + y + x^2"), Jet1([1] + [0] * D, D))


# full reduction


def test_reduce_round_trip():
    p = catalog("(III,III)", theta="x*y", degree=D)
    r = reduce_III_III(p)
    assert (r.theta - j2("x*y")).is_zero_jet()
    assert verify_chain(p, r.chain, r.output) == 0


def test_reduce_random_chains():
    rng = random.Random(7)
    p = catalog("(III,III)", theta="x*y - x^2*y^2", degree=D)
    for _ in range(2):
        q = pull_back(p, random_chain(rng, degree=D, nonlinear_degree=2))
        r = reduce_III_III(q)
        assert _boundary_ok(r.output.second.f)
        assert verify_chain(q, r.chain, r.output) == 0
        assert r.theta.restrict_x().is_zero_jet() and r.theta.restrict_y().is_zero_jet()


def test_reduce_second_function_x_squared():
    d = 12
    p = standard(j2("x + y", d), j2("x + y + x^2", d), d)
    r = reduce_III_III(p)
    t = Jet1.variable(d)
    assert (r.output.second.f.restrict_x() - t).is_zero_jet()
    assert r.theta.restrict_x().is_zero_jet() and r.theta.restrict_y().is_zero_jet()
    assert verify_chain(p, r.chain, r.output) == 0


def test_reduce_wrong_type():
    with pytest.raises(WrongType):
        reduce_III_III(catalog("(III,I)^0", degree=D))


def test_b_reproduced_after_round_trip():
    f = j2("x + y + x^2 + x*y")
    r = reduce_III_III(standard(j2("x + y"), f))
    again = reduce_III_III(r.output)
    assert b_invariant(r.output.second.f).coeffs == again.b.coeffs
    assert b_invariant(r.output.second.f)[0] == 1


# chain verification


def test_verify_chain_identity():
    p = catalog("(V,I)", theta="y", degree=D)
    assert verify_chain(p, Chain.identity(D), p) == 0


def test_verify_chain_detects_bump():
    p = catalog("(III,III)", theta="x*y", degree=D)
    r = reduce_III_III(pull_back(p, random_chain(3, degree=D, nonlinear_degree=2)))
    H2 = (r.chain.H2[0] + Jet2({(1, 1): Fraction(1, 1000)}, D), r.chain.H2[1])
    bumped = Chain(r.chain.h, r.chain.H1, r.chain.K, H2, r.chain.k)
    src = pull_back(p, random_chain(3, degree=D, nonlinear_degree=2))
    assert verify_chain(src, bumped, r.output) >= Fraction(1, 1000)


def test_chain_then_composes():
    rng = random.Random(11)
    c1, c2 = random_chain(rng, degree=6), random_chain(rng, degree=6)
    p = catalog("(IV,I)", theta="y", degree=6)
    q = apply_chain(apply_chain(p, c1), c2)
    assert verify_chain(p, c1.then(c2), q) == 0
    assert (compose1(c2.h, c1.h) - c1.then(c2).h).is_zero_jet()
