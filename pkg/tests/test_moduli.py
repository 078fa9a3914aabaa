import math

import mpmath
import numpy as np
import pytest

from germlab.exceptions import DomainExceeded, NotMonotone, UsageError
from germlab.expr import parse
from germlab.moduli import (
    SmoothFunction1D,
    a_product,
    cross_check_formal,
    default_grid,
    make_triple,
    pointwise_residuals,
    residual_eq35,
    s_recursion_check,
)

FLAT = "1 + flat(t)"


@pytest.fixture(scope="module")
def flat_triple():
    return make_triple(FLAT)


def test_identity_triple():
    tr = make_triple("1")
    for x in (-0.3, 0.0, 0.17):
        assert tr.theta_inv(x) == pytest.approx(x, abs=1e-35)
        assert tr.c(x) == 1
        assert tr.sigma(x) == pytest.approx(x**4, rel=1e-30)


def test_flat_inversion_residual(flat_triple):
    xs = np.linspace(-0.4, 0.4, 100)
    assert max(float(flat_triple.inversion_residual(x)) for x in xs) < 1e-12


def test_theta_for_linear_b():
    tr = make_triple("1 + t")
    got = float(tr.theta_inv(0.1))
    assert got == pytest.approx((-1 + math.sqrt(1.4)) / 2, abs=1e-15)
    # the degree-4 reversion series is within its next term at 0.1
    series = 0.1 - 0.1**2 + 2 * 0.1**3 - 5 * 0.1**4
    assert abs(got - series) < 14 * 0.1**5


def test_c_removable_singularity(flat_triple):
    assert flat_triple.c(0) == 1
    assert float(flat_triple.c(1e-20)) == pytest.approx(1.0, abs=1e-30)


def test_make_triple_rejects():
    with pytest.raises(NotMonotone):
        make_triple("1 - 3*t")
    with pytest.raises(UsageError):
        make_triple("2 + t")


def test_domain_exceeded(flat_triple):
    with pytest.raises(DomainExceeded):
        a_product(flat_triple, 0.9)


def test_smooth_function_from_text():
    b = SmoothFunction1D.from_text("1 + t^2")
    assert float(b(0.5)) == 1.25
    assert SmoothFunction1D(parse("t", ("t",)))(2) == 2


# the product


def test_a_trivial():
    tr = make_triple("1")
    for x in (-0.4, 0.0, 0.25):
        assert a_product(tr, x) == 1


def test_a_at_zero():
    for b in (FLAT, "1 + t", "1 + t^2 - t^3/2"):
        assert a_product(make_triple(b), 0) == 1


def test_flat_report(flat_triple):
    value, rep = a_product(flat_triple, 0.4, report=True)
    assert rep.n_used <= 5
    assert rep.lemma_ok
    assert rep.tail_bound < 1e-30
    assert value > 0
    assert rep.to_json()["N_used"] == rep.n_used


def test_report_diagnostics_non_flat():
    tr = make_triple("1 + t")
    _, rep = a_product(tr, 0.3, report=True)
    assert rep.lemma_ok
    assert all(abs(s) < 0.3 ** (3**n) for n, s in enumerate(rep.orbit[1:], 1))
    # consecutive partial sums settle
    diffs = np.abs(np.diff(rep.partial_values))
    assert np.all(diffs[1:] <= diffs[:-1] + 1e-300)


def test_positive(flat_triple):
    assert all(a_product(flat_triple, x) > 0 for x in np.linspace(-0.4, 0.4, 21))


def test_multiplicative_recursion():
    tr = make_triple("1 + t/2")
    with mpmath.workdps(tr.dps):
        for x in (-0.3, 0.05, 0.2, 0.35):
            lhs = a_product(tr, x)
            rhs = mpmath.sqrt(tr.c(x)) * a_product(tr, tr.sigma(x)) ** mpmath.mpf(0.25)
            assert abs(lhs - rhs) < 1e-12


def test_deterministic(flat_triple):
    assert a_product(flat_triple, 0.31) == a_product(flat_triple, 0.31)


# residuals of the functional equation


def test_residual_constants():
    one = lambda t: 1
    assert residual_eq35("1", one, default_grid(count=11)) == 0
    assert residual_eq35("1", lambda t: 2, default_grid(count=11)) == 14


def test_residual_flat(flat_triple):
    a = lambda s: a_product(flat_triple, s)
    assert residual_eq35(FLAT, a, default_grid(count=201)) < 1e-9


def test_pointwise_rows(flat_triple):
    rows = pointwise_residuals(flat_triple, default_grid(count=5))
    assert len(rows) == 5 and all(r < 1e-9 for _, _, r in rows)
    assert rows[2][1] == 1.0


# S recursion


def test_s_recursion_trivial():
    chk = s_recursion_check(make_triple("1"), default_grid(0.3, 7))
    assert chk.functional == 0 and chk.derivative == 0


def test_s_recursion_flat(flat_triple):
    chk = s_recursion_check(flat_triple, default_grid(0.3, 13), step=1e-4)
    assert chk.functional < 1e-9
    assert chk.derivative < 1e-5


# formal cross check


def test_cross_check_trivial():
    assert cross_check_formal("1").max_deviation == 0


@pytest.mark.parametrize("b", ["1 + t", "1 + t^2"])
def test_cross_check_slope(b):
    chk = cross_check_formal(b, n=12)
    assert chk.slope >= 12.5
    assert chk.max_deviation < 1e-10
