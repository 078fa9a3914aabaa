import random
from fractions import Fraction

import pytest
import sympy as sp

from germlab.jets import Jet1, Jet2

t_, x_, y_ = sp.symbols("t x y")

ACCEPTANCE = {}


def record(n, ok, detail):
    """Print and keep one acceptance line for the terminal summary."""
    line = f"acceptance {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[n] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])


def to_sympy(jet):
    """Polynomial in t (Jet1) or x, y (Jet2) with exact rational coefficients."""
    if isinstance(jet, Jet1):
        return sum(sp.Rational(int(c.numerator), int(c.denominator)) * t_**k for k, c in enumerate(jet.coeffs))
    return sum(sp.Rational(int(c.numerator), int(c.denominator)) * x_**i * y_**j for (i, j), c in jet.terms())


def truncate_sympy(expr, degree, two_vars=False):
    """Drop every monomial of total degree above ``degree``."""
    expr = sp.expand(expr)
    gens = (x_, y_) if two_vars else (t_,)
    poly = sp.Poly(expr, *gens)
    return sum(c * sp.prod([g**e for g, e in zip(gens, m)]) for m, c in poly.terms() if sum(m) <= degree)


def series1(expr, degree):
    """Taylor polynomial of a sympy expression in t."""
    return sp.series(expr, t_, 0, degree + 1).removeO()


def random_jet1(rng, degree, based=False, unit=False):
    cs = [Fraction(rng.randint(-4, 4), rng.choice((1, 2, 3))) for _ in range(degree + 1)]
    if based:
        cs[0] = Fraction(0)
        while cs[1] == 0:
            cs[1] = Fraction(rng.randint(-3, 3), rng.choice((1, 2)))
    if unit:
        cs[0] = Fraction(rng.randint(1, 4), rng.choice((1, 4, 9)))
    return Jet1(cs, degree)


def random_jet2(rng, degree, based=True, max_order=None):
    top = degree if max_order is None else max_order
    c = {}
    for n in range(0 if not based else 1, top + 1):
        for i in range(n + 1):
            c[(i, n - i)] = Fraction(rng.randint(-3, 3), rng.choice((1, 2)))
    return Jet2(c, degree)


@pytest.fixture
def rng():
    return random.Random(12345)
