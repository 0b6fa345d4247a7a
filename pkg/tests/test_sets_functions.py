import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from relsub.errors import DSLSyntaxError, ValidationError
from relsub.expr import derivative, evaluate, parse_expr
from relsub.funcdsl import make_function, make_set
from relsub.guards import parse_guard
from relsub.intervals import parse_intervalset as P
from relsub.regularity import check_lsc_around, check_lsc_relative, lip_estimate
from relsub.sets import Segment


# -- sets ---------------------------------------------------------------------

def test_interval_projection_and_cones():
    S = make_set("[0,1]")
    assert S.project(2.0)[0] == 1.0
    assert S.tangent_cone(0.0).to_intervalset() == P("[0,inf)")
    assert S.tangent_cone(1.0).to_intervalset() == P("(-inf,0]")
    assert S.tangent_cone(0.5).to_intervalset() == P("R")


def test_union_of_intervals():
    U = make_set("[0,1] | [2,3]")
    assert not U.is_convex
    assert U.project(1.4)[0] == 1.0 and U.project(1.6)[0] == 2.0
    assert U.tangent_cone(1.0).to_intervalset() == P("(-inf,0]")


def test_isolated_point_has_zero_cone():
    S = make_set("{0} | [1,2]")
    assert S.tangent_cone(0.0).to_intervalset() == P("{0}")


def test_segment_2d():
    seg = make_set({"type": "segment", "a": [0, 0], "b": [1, 1]}, dim=2)
    np.testing.assert_allclose(seg.project([1, 0]), [0.5, 0.5])
    cone = seg.tangent_cone(np.zeros(2))
    assert cone.contains([1, 1]) and not cone.contains([-1, -1]) and not cone.contains([1, 0])
    assert isinstance(seg, Segment) and seg.length == pytest.approx(math.sqrt(2))


def test_polytope_and_box_projection():
    tri = make_set({"type": "polytope", "A": [[1, 0], [0, 1], [-1, -1]], "b": [1, 1, 0]}, dim=2)
    np.testing.assert_allclose(tri.project([2, 2]), [1, 1], atol=1e-9)
    np.testing.assert_allclose(tri.project([-1, -1]), [0, 0], atol=1e-9)
    box = make_set({"type": "box", "lo": [0, 0], "hi": [1, 1]}, dim=2)
    np.testing.assert_allclose(box.project([2, -1]), [1, 0])


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_box_projection_is_idempotent_and_nonexpansive(x, y):
    box = make_set({"type": "box", "lo": [-1, 0], "hi": [1, 2]}, dim=2)
    p = box.project([x, y])
    np.testing.assert_allclose(box.project(p), p)
    q = box.project([0.3, 0.7])
    assert np.linalg.norm(p - q) <= np.linalg.norm(np.array([x, y]) - [0.3, 0.7]) + 1e-12


# -- guards -------------------------------------------------------------------

def test_guards():
    g = parse_guard("x > 0 & y <= 1", dim=2)
    assert g.contains([1, 0]) and not g.contains([0, 0]) and not g.contains([1, 2])
    h = parse_guard("[0,1] | {3}")
    assert h.contains(3.0) and not h.contains(2.0)


def test_guard_syntax_error():
    with pytest.raises(DSLSyntaxError):
        parse_guard("x >> 0")


# -- functions ------------------------------------------------------------------

def test_piecewise_evaluation():
    f = make_function([("x<0", "-x"), ("x>=0", "x^2")])
    assert f(-1.0) == 1.0 and f(2.0) == 4.0
    assert str(f.piece_derivative(1)) == "2*x"


def test_default_value_outside_pieces():
    f = make_function([("[0,1]", "0")])
    assert f(2.0) == math.inf and f(0.5) == 0.0
    g = make_function({"pieces": [["[0,1]", "x"]], "default": "-inf"})
    assert g(-1.0) == -math.inf


def test_extended_values():
    f = make_function([("x < 0", "inf"), ("{0}", "0"), ("x > 0", "-inf")])
    assert (f(-1), f(0), f(1)) == (math.inf, 0.0, -math.inf)


def test_restrict_scale_shift():
    f = make_function([("x<0", "-x"), ("x>=0", "x^2")])
    fr = f.restrict(make_set("[0,1]"))
    assert fr(-1.0) == math.inf and fr(0.5) == 0.25
    assert f.scale(3.0)(2.0) == 12.0
    assert f.shift(-1.0)(2.0) == 3.0


@pytest.mark.parametrize("text", ["x^^2", "sin(x)", "1/", "x +"])
def test_syntax_errors(text):
    with pytest.raises(DSLSyntaxError):
        make_function(text)


def test_overlapping_pieces_rejected():
    with pytest.raises(ValidationError):
        make_function([("x <= 1", "x"), ("x >= 0", "2*x")])


EXPRS = ["x^3/3", "exp(x) - 1", "1/(x+3) - 1", "abs(x - 0.3)*x", "-x^2 + 2*x", "exp(-x^2)*(x+1)",
         "(x^2 + 1)/(x^2 + 2)", "abs(x)^3"]


@settings(max_examples=60)
@given(st.sampled_from(EXPRS), st.floats(-2, 2))
def test_derivative_matches_finite_difference(text, x):
    e = parse_expr(text)
    assume(abs(x - 0.3) > 1e-3 and abs(x) > 1e-3)
    h = 1e-6
    X = np.array([[x - h], [x], [x + h]])
    v = evaluate(e, X)
    fd = (v[2] - v[0]) / (2 * h)

    def sign_of(arg):
        return math.copysign(1.0, evaluate(arg, X[1:2])[0])

    d = evaluate(derivative(e, sign_of=sign_of), X[1:2])[0]
    assert d == pytest.approx(fd, rel=1e-5, abs=1e-6)


# -- regularity -------------------------------------------------------------------

def test_lip_estimate_values():
    assert lip_estimate(make_function("abs(x)"), make_set("R"), 0.0).value == pytest.approx(1.0)
    est = lip_estimate(make_function("x^3/3"), make_set("[0,1]"), 0.5)
    assert est.confident and est.value == pytest.approx(0.25, abs=1e-4)
    near_pole = lip_estimate(make_function([("x > -1", "1/(x+1)")]), make_set("[-1,0]"), -0.999)
    assert near_pole.value > 1e5


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["abs(x)", "x^3/3", "exp(x) - 1", "-x^2"]),
       st.floats(0.1, 10), st.floats(-0.8, 0.8))
def test_lip_scales_linearly(text, lam, x):
    f, S = make_function(text), make_set("[-1,1]")
    base = lip_estimate(f, S, x).value
    assert lip_estimate(f.scale(lam), S, x).value == pytest.approx(lam * base, rel=1e-9, abs=1e-12)


def test_lsc_checks():
    up = make_function([("(-inf,0]", "x"), ("(0,inf)", "x + 1")])
    down = make_function([("(-inf,0)", "x"), ("[0,inf)", "x + 1")])
    R = make_set("R")
    assert check_lsc_relative(up, R, 0.0).is_in
    assert check_lsc_relative(down, R, 0.0).is_out
    assert check_lsc_around(make_function("-abs(x)"), R, 0.0).is_in
