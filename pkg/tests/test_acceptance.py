"""The ten acceptance criteria.  Each test prints one PASS/FAIL line."""

import random
import time
from fractions import Fraction

import numpy as np
import sympy as sp

from conftest import record
from germlab.germs import PAIR_TAGS, classify_pair
from germlab.jets import Jet1, Jet2, invert1, substitute2, weierstrass_divide
from germlab.moduli import a_product, cross_check_formal, default_grid, make_triple, residual_eq35
from germlab.normal_forms import (
    catalog,
    catalog_text,
    moduli_residual,
    pull_back,
    random_chain,
    reduce_III_III,
    solve_moduli_formal,
    verify_chain,
)
from germlab.render import DiagramDocument, audit, render_family, trace_families
from germlab.webs import v_I_web, vi_I_equivalence_test, web_singular_set

CATALOG = [
    ("(I,I)^0", {}),
    ("(I,I)^1", {}),
    ("(I,I)^2", {}),
    ("(II,I)", {}),
    ("(III,I)^0", {"theta": "0"}),
    ("(III,I)^1", {"theta": "y"}),
    ("(IV,I)", {"theta": "y"}),
    ("(V,I)", {"theta": "y"}),
    ("(VI,I)", {"theta": "0", "alpha": "0"}),
    ("(III,III)", {"theta": "0"}),
    ("(III,III)", {"theta": "x*y"}),
]


def test_1_catalog_fixed_point():
    start = time.perf_counter()
    got = [(tag, classify_pair(catalog(tag, **kw)).tag) for tag, kw in CATALOG]
    elapsed = time.perf_counter() - start
    wrong = [g for g in got if g[0] != g[1]]
    ok = not wrong and elapsed < 5
    record(1, ok, f"{len(got) - len(wrong)}/{len(got)} catalog forms classified in {elapsed:.2f} s")
    assert ok, wrong


def test_2_invariance_under_coordinate_changes():
    failures = []
    for index, (tag, kw) in enumerate(CATALOG):
        rng = random.Random(1000 + index)
        p = catalog(tag, degree=12, **kw)
        for n in range(50):
            got = classify_pair(pull_back(p, random_chain(rng, degree=12))).tag
            if got != tag:
                failures.append((tag, n, got))
    ok = not failures
    record(2, ok, f"{50 * len(CATALOG)} perturbed diagrams, {len(failures)} reclassified")
    assert ok, failures[:5]


def test_3_formal_functional_equation():
    N = 24
    bs = [[1], [1, 1], [1, -1, 2, -5]]
    start = time.perf_counter()
    good = 0
    for cs in bs:
        b = Jet1([Fraction(c) for c in cs] + [Fraction(0)] * (N + 1 - len(cs)), N)
        a = solve_moduli_formal(b, N)
        if moduli_residual(a, b).is_zero_jet() and a[0] == 1 and a[1] == -b[1] / 2:
            good += 1
    elapsed = time.perf_counter() - start
    ok = good == len(bs) and elapsed < 2
    record(3, ok, f"{good}/{len(bs)} exact solutions at N = {N} in {elapsed:.2f} s")
    assert ok


def test_4_numerical_product():
    b = "1 + flat(t)"
    tr = make_triple(b)
    grid = default_grid(0.4, 201)
    res = residual_eq35(b, lambda s: a_product(tr, s), grid)
    reports = [a_product(tr, x, report=True)[1] for x in grid]
    factors = max(r.n_used for r in reports)
    lemma = all(r.lemma_ok for r in reports)
    ok = res < 1e-9 and factors <= 6 and lemma
    record(4, ok, f"residual {res:.2e} on 201 points, at most {factors} factors, tail inequality {'held' if lemma else 'broken'}")
    assert ok


def test_5_formal_numeric_cross_check():
    chk = cross_check_formal("1 + t", n=12, samples=[0.01, 0.02, 0.03, 0.04, 0.05])
    ok = chk.slope >= 12.5
    record(5, ok, f"log-log slope {chk.slope:.2f}")
    assert ok


def _random_theta(rng, d):
    c = {}
    for i in range(1, 4):
        for j in range(1, 5 - i):
            c[(i, j)] = Fraction(rng.randint(-3, 3), rng.choice((1, 2, 3)))
    return Jet2(c, d)


def test_6_chain_soundness():
    d = 10
    rng = random.Random(2024)
    bad = []
    for n in range(25):
        p = catalog("(III,III)", theta=_random_theta(rng, d), degree=d)
        q = pull_back(p, random_chain(rng, degree=d))
        r = reduce_III_III(q)
        axes = r.theta.restrict_x().is_zero_jet() and r.theta.restrict_y().is_zero_jet()
        resid = verify_chain(q, r.chain, r.output)
        if resid != 0 or not axes:
            bad.append((n, resid, axes))
    ok = not bad
    record(6, ok, f"25 reductions, {len(bad)} with nonzero residual or boundary terms")
    assert ok, bad


def test_7_web_singular_set():
    S = web_singular_set(v_I_web("0", 1), (1, 2), (-1.3, 0.1, 0.01, 0.4, 141, 40))
    u, v = S.points[:, 0], S.points[:, 1]
    inside = (v > 0.01) & (v < 0.4)
    worst = float(np.max(np.abs(u[inside] + 3 * v[inside]))) if inside.any() else np.inf
    ok = inside.sum() > 10 and worst < 1e-6
    record(7, ok, f"{int(inside.sum())} samples, max |u + 3v| = {worst:.1e}")
    assert ok


def test_8_cusp_interior_equivalence():
    bump = "flat((u + sqrt(u^2))/2)"
    start = time.perf_counter()
    verdicts = [
        vi_I_equivalence_test("u*v", "v", "u*v", "v", samples=2000).equivalent,
        vi_I_equivalence_test("u*v", "v", "u*v + u^2", "v", samples=2000).equivalent,
        vi_I_equivalence_test("u*v", "v", "u*v", f"v + {bump}", samples=2000).equivalent,
    ]
    elapsed = time.perf_counter() - start
    ok = verdicts == [True, False, True] and elapsed < 2
    record(8, ok, f"verdicts {verdicts} in {elapsed:.2f} s")
    assert ok


def test_9_series_kernels():
    inv = invert1(Jet1([0, 1, 1, 0, 0, 0, 0, 0, 0], 8))
    s = sp.symbols("s")
    oracle = [sp.Integer(0)]
    for n in range(1, 9):
        oracle.append(sp.expand(sp.series((1 / (1 + s)) ** n, s, 0, n).removeO()).coeff(s, n - 1) / n)
    catalan = [0] + [(-1) ** (n - 1) * sp.catalan(n - 1) for n in range(1, 9)]
    got = [sp.Rational(int(c.numerator), int(c.denominator)) for c in inv.coeffs]
    series_ok = got == oracle == catalan

    rng = random.Random(99)
    X, Y = Jet2.x(8), Jet2.y(8)
    failures = 0
    for _ in range(100):
        F = Jet2({(i, j): Fraction(rng.randint(-3, 3), rng.choice((1, 2))) for i in range(5) for j in range(5 - i)}, 8)
        tail = Jet2({(i, j): Fraction(rng.randint(-2, 2), rng.choice((1, 3))) for i in range(4) for j in range(1, 4 - i)}, 8)
        w = X * X * rng.choice((1, 2, -3)) + X * Y * rng.randint(-2, 2) + tail + X**3 * Fraction(rng.randint(-2, 2), 2)
        A, B = weierstrass_divide(F, w)
        back = substitute2(A, w, Y) + X * substitute2(B, w, Y)
        if not (back - F).is_zero_jet():
            failures += 1
    ok = series_ok and failures == 0
    record(9, ok, f"Catalan coefficients {'match' if series_ok else 'differ'}; {100 - failures}/100 divisions resubstitute exactly")
    assert ok


def test_10_render_audit():
    samples = {"(III,I)^1": {"theta": "y"}, "(IV,I)": {"theta": "y"}, "(V,I)": {"theta": "y"}, "(III,III)": {"theta": "x*y"}}
    worst, same = 0.0, True
    for tag in PAIR_TAGS:
        d = DiagramDocument.from_json(catalog_text(tag, **samples.get(tag, {})))
        fams = trace_families(d, [0.1, 0.2])
        worst = max(worst, audit(fams)[0])
        for fmt in ("svg", "csv"):
            same &= render_family(d, [0.1, 0.2], fmt=fmt) == render_family(d, [0.1, 0.2], fmt=fmt)
    ok = worst <= 1e-6 and same
    record(10, ok, f"max vertex residual {worst:.1e}; repeated renders {'identical' if same else 'differ'}")
    assert ok
