"""Exact 1-D engine: worked examples plus frozen values for the wider corpus.

Frozen values below were cross-checked against the sampling estimator
(see ``test_estimator.py``) before being written down.
"""

import math

import pytest

from relsub import corpus as C
from relsub.errors import DomainError
from relsub.funcdsl import make_function, make_set
from relsub.intervals import IntervalSet, parse_intervalset as P
from relsub.subdiff import canonical_kind, segment_subdiff, subdiff

R2 = math.sqrt(2.0)


def sd(f, omega, x, kind="limiting", eps=0.0):
    return subdiff(f, make_set(omega), x, kind, eps).set


# -- worked examples ------------------------------------------------------------

@pytest.mark.parametrize("eps", [0.0, 0.1, 1.0])
def test_step_extreme_eps_regular(eps):
    assert sd(C.STEP_EXTREME, "[0,inf)", 0.0, "eps_regular", eps) == P("[0,inf)")


def test_step_extreme_limiting():
    assert sd(C.STEP_EXTREME, "[0,inf)", 0.0) == P("[0,inf)")


def test_neg_abs_on_left_halfline():
    assert sd(C.NEG_ABS, "(-inf,0]", 0.0, "eps_regular") == P("{}")
    assert sd(C.NEG_ABS, "(-inf,0]", 0.0) == P("{1}")
    assert sd(C.NEG_ABS, "(-inf,0]", 0.0, "plain") == P("[1,inf)")


def test_exp_on_left_halfline():
    assert sd(C.EXP_MINUS_ONE, "(-inf,0]", 0.0) == P("{1}")
    assert sd(C.EXP_MINUS_ONE, "(-inf,0]", 0.0, "eps_regular") == P("{}")


def test_cube_on_unit_interval():
    U = "[0,1]"
    assert sd(C.CUBE_THIRD, U, 0.0, "plain") == P("(-inf,0]")
    assert sd(C.CUBE_THIRD, U, 0.5, "plain") == P("{0.25}")
    assert sd(C.CUBE_THIRD, U, 1.0, "plain") == P("[1,inf)")
    for x in (0.0, 0.25, 0.5, 0.75, 0.999):
        assert sd(C.CUBE_THIRD, U, x) == IntervalSet.point(x * x)


def test_reciprocal_limiting_follows_definition():
    # restriction gives [-1, inf); the tangent filter (-inf, 0] cuts it to [-1, 0]
    assert sd(C.SHIFTED_RECIPROCAL, "[-1/2,0]", 0.0) == P("[-1,0]")


def test_cube_limiting_at_right_endpoint():
    assert sd(C.CUBE_THIRD, "[0,1]", 1.0) == P("{1}")
    assert sd(C.CUBE_THIRD, "[0,1]", 1.0, "eps_regular") == P("{}")


def test_inf_zero_neginf():
    assert sd(C.INF_ZERO_NEGINF, "[-1/2,0]", 0.0) == P("(-inf,0]")


# -- frozen corpus values -----------------------------------------------------------

FROZEN = {
    # name: (eps_regular eps=0, eps=0.1, limiting, plain)
    "step_extreme@0": ("[0,inf)", "[0,inf)", "[0,inf)", "R"),
    "neg_abs@0": ("{}", "{}", "{1}", "[1,inf)"),
    "neg_abs@-0.5": ("{1}", (1 - 0.1 * R2, 1 + 0.1 * R2), "{1}", "{1}"),
    "shifted_reciprocal@0": ("[-1,0]", (-1 - 0.1 * R2, 0.0), "[-1,0]", "[-1,inf)"),
    "inf_zero_neginf@0": ("(-inf,0]", "(-inf,0]", "(-inf,0]", "R"),
    "exp_minus_one@0": ("{}", "{}", "{1}", "[1,inf)"),
    "cube_third@0": ("{0}", "[0,0.1]", "{0}", "(-inf,0]"),
    "cube_third@0.5": ("{0.25}", None, "{0.25}", "{0.25}"),
    "cube_third@1": ("{}", "{}", "{1}", "[1,inf)"),
    "abs@0": ("[-1,1]", (-1 - 0.1 * R2, 1 + 0.1 * R2), "[-1,1]", "[-1,1]"),
    "abs@1": ("{}", "{}", "{1}", "[1,inf)"),
    "neg_square@0.3": ("{-0.6}", None, "{-0.6}", "{-0.6}"),
    "jump_affine@0": ("[1,inf)", (1 - 0.1 * R2, math.inf), "[1,inf)", "[1,inf)"),
    "isolated@0": ("R", "R", "R", "R"),
}


def _expect(v):
    if isinstance(v, tuple):
        return P(f"[{v[0]!r},{'inf)' if v[1] == math.inf else repr(v[1]) + ']'}")
    return P(v)


@pytest.mark.parametrize("case", C.TRIPLES, ids=lambda c: c.name)
def test_frozen_corpus(case):
    reg0, reg1, lim, plain = FROZEN[case.name]
    got = [subdiff(case.f, case.omega, case.xbar, k, e).set
           for k, e in (("eps_regular", 0.0), ("eps_regular", 0.1), ("limiting", 0.0), ("plain", 0.0))]
    assert got[0] == P(reg0)
    if reg1 is not None:
        exp = _expect(reg1)
        assert len(got[1]) == len(exp)
        for a, b in zip(got[1].parts, exp.parts):
            assert a.lo == pytest.approx(b.lo, abs=1e-12) and a.hi == pytest.approx(b.hi, abs=1e-12)
    assert got[2] == P(lim)
    assert got[3] == P(plain)


def test_smooth_interior_eps_interval():
    # eps-regular set of a smooth function at an interior point: |s - f'| <= eps * sqrt(1 + f'^2)
    s = sd(C.NEG_SQUARE, "[-1,1]", 0.3, "eps_regular", 0.1)
    half = 0.1 * math.sqrt(1 + 0.36)
    assert s.inf == pytest.approx(-0.6 - half, abs=1e-12)
    assert s.sup == pytest.approx(-0.6 + half, abs=1e-12)
    assert s.contains(-0.6)


def test_segment_pullback():
    plane = make_function("x + y", dim=2)
    s = segment_subdiff(plane, [0, 0], [1, 1], [0.5, 0.5], "limiting").set
    assert len(s) == 1 and s.inf == s.sup == pytest.approx(R2, abs=1e-12)


def test_kind_aliases():
    assert canonical_kind("limiting") == canonical_kind("limiting_relative")
    with pytest.raises(ValueError):
        canonical_kind("clarke")


def test_point_outside_set():
    with pytest.raises(DomainError):
        sd(C.CUBE_THIRD, "[0,1]", 2.0)


def test_json_shape():
    out = subdiff(C.NEG_ABS, make_set("(-inf,0]"), 0.0).to_json()
    assert out["set"] == "{1}"
