import time

import numpy as np
import pytest

from germlab.exceptions import BadModulus, EmptySampleRegion, NoWeb, UsageError
from germlab.expr import eval_array, parse
from germlab.webs import (
    DeltaRegion,
    FoliationConfig,
    delta_contains,
    v_I_web,
    vi_I_equivalence_test,
    web_domain,
    web_singular_set,
)

BUMP = "flat((u + sqrt(u^2))/2)"
GRID = (-0.5, 0.5, 0.01, 0.5, 41, 37)


def test_v_I_web_identities():
    W = v_I_web()
    u = np.linspace(-0.5, 0.5, 9)
    v = np.linspace(0.01, 0.6, 9)
    f1, f2, f3 = (eval_array(f, u, v) for f in W.functions)
    assert np.allclose(f1 + f2, 2 * u, atol=1e-15)
    assert np.allclose(f1 - f2, 2 * (u + v) * np.sqrt(v), atol=1e-15)
    assert np.allclose(f3, u + v, atol=1e-15)
    assert W.domain == "v>0"


def test_v_I_web_bad_modulus():
    with pytest.raises(BadModulus):
        v_I_web("u")
    with pytest.raises(BadModulus):
        v_I_web("1 + u^2")
    with pytest.raises(BadModulus):
        v_I_web("sqrt(v)")


def test_singular_set_is_the_line():
    S = web_singular_set(v_I_web("u*v + v^2"), (1, 2), GRID)
    assert len(S) > 20
    u, v = S.points[:, 0], S.points[:, 1]
    assert np.max(np.abs(u + 3 * v)) < 1e-6
    slope, intercept = np.polyfit(v, u, 1)
    assert slope == pytest.approx(-3, abs=1e-6) and intercept == pytest.approx(0, abs=1e-6)


def test_singular_set_independent_of_third_function():
    a = web_singular_set(v_I_web("0"), (1, 2), GRID)
    b = web_singular_set(v_I_web("u^2 - 3*u*v", b=2), (1, 2), GRID)
    assert np.array_equal(a.points, b.points)


def test_singular_set_halved_step():
    W = v_I_web()
    S = web_singular_set(W, (1, 2), GRID)
    det, _ = W.jacobian_det(1, 2, S.points[:, 0], S.points[:, 1], step=0.5e-5)
    assert np.max(np.abs(det)) <= 1e-8


@pytest.mark.parametrize("fs", [("u", "u + v^2"), ("u", "v")])
def test_empty_singular_sets(fs):
    W = FoliationConfig.from_json({"functions": list(fs), "domain": "v>0"})
    assert len(web_singular_set(W, (1, 2), GRID)) == 0


def test_pole_is_not_a_zero():
    # det changes sign across u = 0 through a pole, not a zero
    W = FoliationConfig.from_json({"functions": ["log(u^2 + v^2)", "v"], "domain": "plane"})
    S = web_singular_set(W, (1, 2), (-0.5, 0.5, 0.2, 0.5, 41, 11))
    assert np.all(np.abs(S.points[:, 0]) < 1e-8)


def test_config_round_trip():
    W = v_I_web("u*v")
    back = FoliationConfig.from_json(W.to_json())
    assert back == W


def test_config_rejects():
    with pytest.raises(UsageError):
        FoliationConfig.from_json({"functions": ["u"], "domain": "disk"})
    with pytest.raises(UsageError):
        FoliationConfig.from_json({"fns": ["u"]})


# the cusp interior


def test_delta_examples():
    assert delta_contains(-1, 0)
    assert not delta_contains(1, 1)
    for t in (0.2, 0.05, 0.37, 0.5):
        u, v = -3 * t**2, -2 * t**3
        assert not delta_contains(u, v)
        assert delta_contains(u, 0.999 * v)


def test_delta_symmetric():
    rng = np.random.default_rng(0)
    u, v = rng.uniform(-1, 1, 500), rng.uniform(-1, 1, 500)
    assert np.array_equal(delta_contains(u, v), delta_contains(u, -v))


def test_delta_samples():
    u, v = DeltaRegion(-0.3).sample(500, seed=3)
    assert len(u) > 490
    assert np.all(delta_contains(u, v)) and np.all(u >= -0.3) and np.all(u < 0)
    u2, v2 = DeltaRegion(-0.3).sample(500, seed=3)
    assert np.array_equal(u, u2) and np.array_equal(v, v2)


def test_delta_seed_from_environment(monkeypatch):
    monkeypatch.setenv("GERMLAB_SEED", "9")
    a = DeltaRegion().sample(50)
    b = DeltaRegion().sample(50, seed=9)
    assert np.array_equal(a[0], b[0])


def test_delta_empty():
    with pytest.raises(EmptySampleRegion):
        DeltaRegion(0.1)
    with pytest.raises(EmptySampleRegion):
        DeltaRegion().sample(0)


# equivalence for (VI,I)


def test_equivalence_verdicts():
    start = time.perf_counter()
    same = vi_I_equivalence_test("u*v", "v", "u*v", "v", samples=2000)
    off = vi_I_equivalence_test("u*v", "v", "u*v + u^2", "v", samples=2000)
    bump = vi_I_equivalence_test("u*v", "v", "u*v", f"v + {BUMP}", samples=2000)
    assert time.perf_counter() - start < 2
    assert same.equivalent and same.max_theta_dev == 0 and same.max_f_dev == 0
    assert not off.equivalent and off.max_theta_dev > 1e-8
    assert bump.equivalent and bump.max_f_dev == 0


def test_equivalence_u_squared_deviation_bound():
    u, _ = DeltaRegion().sample(2000, seed=0)
    rep = vi_I_equivalence_test("0", "v", "u^2", "v", samples=2000, seed=0)
    assert rep.max_theta_dev >= np.min(u**2)
    assert rep.max_theta_dev == pytest.approx(np.max(u**2))


def test_bump_is_visible_off_delta():
    u = np.array([0.3])
    assert eval_array(parse(BUMP, ("u", "v")), u, np.zeros(1))[0] > 0


def test_equivalence_symmetric():
    a = vi_I_equivalence_test("u", "v + u*v", "u + v^3", "v", seed=4)
    b = vi_I_equivalence_test("u + v^3", "v", "u", "v + u*v", seed=4)
    assert a == b


# web domains


def test_web_domains():
    d = web_domain("(III,III)")
    assert d.multiplicity == 4 and d.region == "u>0,v>0"
    assert d.contains(0.1, 0.2) and not d.contains(-0.1, 0.2)
    d = web_domain("(VI,I)")
    assert d.multiplicity == 4 and d.contains(-1, 0)
    for tag in ("(III,I)^0", "(III,I)^1", "(IV,I)", "(V,I)"):
        assert web_domain(tag).multiplicity == 3 and web_domain(tag).region == "v>0"
    with pytest.raises(NoWeb):
        web_domain("(I,I)^0")
