import math

import pytest

from relsub import corpus as C
from relsub.calculus import (HOLDS, INCONCLUSIVE, decompose, fuzzy_sum_search,
                             inclusion_chain_check, lipschitz_bound_check, scalar_rule_check,
                             sets_close, sum_rule_check)
from relsub.funcdsl import make_set
from relsub.intervals import parse_intervalset as P

HALF_LEFT = make_set("(-inf,0]")
UNIT = make_set("[0,1]")


def test_scalar_identity():
    r = scalar_rule_check(C.CUBE_THIRD, UNIT, 0.5, 1.0, 0.1)
    w = r.witnesses
    assert r.verdict == HOLDS
    assert sets_close(w["inner"], w["middle"]) and sets_close(w["middle"], w["outer"])


def test_scalar_doubles_neg_abs():
    r = scalar_rule_check(C.NEG_ABS, HALF_LEFT, 0.0, 2.0, 0.0)
    assert r.holds
    assert r.witnesses["limiting_of_scaled"] == P("{2}")
    assert r.witnesses["limiting_scaled"] == P("{2}")


def test_scalar_step_extreme():
    r = scalar_rule_check(C.STEP_EXTREME, make_set("[0,inf)"), 0.0, 3.0, 0.3)
    assert r.holds
    assert all(r.witnesses[k] == P("[0,inf)") for k in ("inner", "middle", "outer"))
    assert r.tolerances["eps_hat"] == pytest.approx(0.1)
    assert r.tolerances["eps_tilde"] == pytest.approx(0.3)


def test_scalar_rejects_nonpositive():
    with pytest.raises(ValueError):
        scalar_rule_check(C.ABS, make_set("R"), 0.0, 0.0)


def test_lipschitz_bound_examples():
    r = lipschitz_bound_check(C.NEG_ABS, HALF_LEFT, -0.5, 0.0)
    assert r.holds and r.witnesses["bound"] == pytest.approx(1.0)
    assert r.witnesses["max_norm"] == pytest.approx(1.0)
    r = lipschitz_bound_check(C.CUBE_THIRD, UNIT, 0.5, 0.1)
    assert r.holds and r.witnesses["bound"] == pytest.approx(1.2)
    r = lipschitz_bound_check(C.ZERO, UNIT, 0.5, 0.0)
    assert r.holds and r.witnesses["bound"] == 0.0 and r.witnesses["max_norm"] == 0.0


def test_lipschitz_bound_inconclusive_without_lipschitz():
    assert lipschitz_bound_check(C.STEP_EXTREME, make_set("[0,inf)"), 0.0).verdict == INCONCLUSIVE


@pytest.mark.parametrize("f,omega,x,chain", [
    (C.CUBE_THIRD, "[0,1]", 0.0, ("{0}", "{0}", "(-inf,0]")),
    (C.NEG_ABS, "(-inf,0]", 0.0, ("{}", "{1}", "[1,inf)")),
    (C.STEP_EXTREME, "[0,inf)", 0.0, ("[0,inf)", "[0,inf)", "R")),
])
def test_inclusion_chain_examples(f, omega, x, chain):
    r = inclusion_chain_check(f, make_set(omega), x)
    assert r.holds
    w = r.witnesses
    assert (w["regular"], w["limiting_relative"], w["limiting_plain"]) == tuple(P(s) for s in chain)


def test_sum_rule_exp_neg_abs():
    r = sum_rule_check(C.EXP_MINUS_ONE, C.NEG_ABS, HALF_LEFT, 0.0)
    assert r.holds
    assert r.witnesses["minkowski"] == P("{2}")
    assert r.witnesses["sum"].issubset(P("{2}"))


def test_sum_rule_cube_neg_abs():
    r = sum_rule_check(C.CUBE_THIRD, C.NEG_ABS, UNIT, 0.5)
    assert r.holds and r.witnesses["sum"] == P("{-0.75}") == r.witnesses["minkowski"]


def test_sum_rule_zero_summand():
    r = sum_rule_check(C.CUBE_THIRD, C.ZERO, UNIT, 0.5)
    assert r.holds and r.witnesses["second"].contains(0.0)


def test_sum_rule_hypothesis_failure_is_inconclusive():
    r = sum_rule_check(C.STEP_EXTREME, C.NEG_ABS, UNIT, 0.0)
    assert r.verdict == INCONCLUSIVE
    assert ("f1_relatively_lipschitz", "fail") in r.hypotheses


def test_sum_rule_nonconvex_set_is_inconclusive():
    r = sum_rule_check(C.ABS, C.ZERO, make_set("[-1,0] | [1,2]"), 0.0)
    assert r.verdict == INCONCLUSIVE and ("set_convex", "fail") in r.hypotheses


def test_fuzzy_trivial_additivity():
    cert = fuzzy_sum_search(C.CUBE_THIRD, C.ZERO, UNIT, 0.5, 0.25, 0.0, 0.1)
    assert cert.gamma <= 1e-12
    assert cert.x1 == cert.x2 == 0.5
    assert (cert.s1, cert.s2) == pytest.approx((0.25, 0.0))


def test_fuzzy_neg_abs_pair():
    cert = fuzzy_sum_search(C.NEG_ABS, C.NEG_ABS, HALF_LEFT, -0.3, 2.0, 0.0, 0.1)
    assert cert.gamma <= 1e-12 and (cert.s1, cert.s2) == pytest.approx((1.0, 1.0))
    assert abs(cert.x1 + 0.3) <= 0.1 and abs(cert.x2 + 0.3) <= 0.1


def test_fuzzy_rejects_non_subgradient():
    # derivative 2 from the left at 0, no regular subgradient of the sum
    with pytest.raises(ValueError):
        fuzzy_sum_search(C.EXP_MINUS_ONE, C.NEG_ABS, HALF_LEFT, 0.0, 0.0, 0.0, 0.1)
    with pytest.raises(ValueError):
        fuzzy_sum_search(C.CUBE_THIRD, C.ZERO, UNIT, 0.5, 0.25, 0.2, 0.1)


def test_fuzzy_certificate_constraints():
    for case, xstar in C.SMOOTH_PAIRS:
        cert = fuzzy_sum_search(case.f1, case.f2, case.omega, case.xbar, xstar, 0.0, 0.1)
        for x, f in ((cert.x1, case.f1), (cert.x2, case.f2)):
            assert abs(x - case.xbar) <= cert.eta
            assert abs(f(x) - f(case.xbar)) <= cert.eta
        assert len(cert.trend) == 5


def test_decompose():
    assert decompose(0.0, P("[-1,0]"), P("(-inf,0]")) == (0.0, 0.0)
    s1, s2 = decompose(0.5, P("[0,1]"), P("{0} | [2,3]"))
    assert s1 + s2 == 0.5 and P("[0,1]").contains(s1)
    assert decompose(0.0, P("{1}"), P("{1}")) is None


def test_report_json_has_no_nonfinite_numbers():
    j = inclusion_chain_check(C.STEP_EXTREME, make_set("[0,inf)"), 0.0).to_json()
    assert j["witnesses"]["limiting_plain"] == "(-inf, inf)"
    assert j["verdict"] == HOLDS
    assert not any(isinstance(v, float) and not math.isfinite(v) for v in j["tolerances"].values())
