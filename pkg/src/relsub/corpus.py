"""Reference functions, sets and points used by the property suites and benchmarks."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .funcdsl import make_function, make_set


def fn(source, name, dim=1):
    return make_function(source, dim=dim, name=name)


# functions from the worked examples
STEP_EXTREME = fn([("(-inf,0)", "-inf"), ("{0}", "0")], "step_extreme")
NEG_ABS = fn("-abs(x)", "neg_abs")
SHIFTED_RECIPROCAL = fn([("x > -1", "1/(x+1) - 1")], "shifted_reciprocal")
INF_ZERO_NEGINF = fn([("x < 0", "inf"), ("{0}", "0"), ("x > 0", "-inf")], "inf_zero_neginf")
EXP_MINUS_ONE = fn("exp(x) - 1", "exp_minus_one")
CUBE_THIRD = fn("x^3/3", "cube_third")
INDICATOR_UNIT = fn([("[0,1]", "0")], "indicator_unit")

# extra shapes
ABS = fn("abs(x)", "abs")
NEG_SQUARE = fn("-x^2", "neg_square")
SQUARE = fn("x^2", "square")
ZERO = fn("0", "zero")
JUMP_AFFINE = fn([("(-inf,0]", "x"), ("(0,inf)", "x + 1")], "jump_affine")
ISOLATED = fn([("{0} | [1,2]", "0")], "isolated")


@dataclass(frozen=True)
class Case:
    name: str
    f: object
    omega: object
    xbar: float


def _case(name, f, omega, xbar):
    return Case(name, f, make_set(omega), float(xbar))


TRIPLES = (
    _case("step_extreme@0", STEP_EXTREME, "[0,inf)", 0.0),
    _case("neg_abs@0", NEG_ABS, "(-inf,0]", 0.0),
    _case("neg_abs@-0.5", NEG_ABS, "(-inf,0]", -0.5),
    _case("shifted_reciprocal@0", SHIFTED_RECIPROCAL, "[-1/2,0]", 0.0),
    _case("inf_zero_neginf@0", INF_ZERO_NEGINF, "[-1/2,0]", 0.0),
    _case("exp_minus_one@0", EXP_MINUS_ONE, "(-inf,0]", 0.0),
    _case("cube_third@0", CUBE_THIRD, "[0,1]", 0.0),
    _case("cube_third@0.5", CUBE_THIRD, "[0,1]", 0.5),
    _case("cube_third@1", CUBE_THIRD, "[0,1]", 1.0),
    _case("abs@0", ABS, "R", 0.0),
    _case("abs@1", ABS, "[-1,1]", 1.0),
    _case("neg_square@0.3", NEG_SQUARE, "[-1,1]", 0.3),
    _case("jump_affine@0", JUMP_AFFINE, "R", 0.0),
    _case("isolated@0", ISOLATED, "R", 0.0),
)


@dataclass(frozen=True)
class SumCase:
    name: str
    f1: object
    f2: object
    omega: object
    xbar: float


def _sum(name, f1, f2, omega, xbar):
    return SumCase(name, f1, f2, make_set(omega), float(xbar))


# pairs meeting the sum-rule hypotheses (f1 Lipschitz, f2 lsc around, convex set)
SUM_PAIRS = (
    _sum("exp+neg_abs", EXP_MINUS_ONE, NEG_ABS, "(-inf,0]", 0.0),
    _sum("reciprocal+neg_abs", SHIFTED_RECIPROCAL, NEG_ABS, "[-1/2,0]", 0.0),
    _sum("cube+neg_abs", CUBE_THIRD, NEG_ABS, "[0,1]", 0.5),
    _sum("cube+zero", CUBE_THIRD, ZERO, "[0,1]", 0.5),
    _sum("abs+neg_square", ABS, NEG_SQUARE, "[-1,1]", 0.0),
    _sum("exp+cube", EXP_MINUS_ONE, CUBE_THIRD, "R", 0.3),
    _sum("square+jump_affine", SQUARE, JUMP_AFFINE, "R", 0.0),
    _sum("neg_abs+indicator", NEG_ABS, INDICATOR_UNIT, "[0,1]", 0.0),
)

# smooth pairs at points where both functions are differentiable
SMOOTH_PAIRS = (
    (_sum("neg_abs+neg_abs", NEG_ABS, NEG_ABS, "(-inf,0]", -0.3), 2.0),
    (_sum("cube+zero", CUBE_THIRD, ZERO, "[0,1]", 0.5), 0.25),
    (_sum("exp+cube", EXP_MINUS_ONE, CUBE_THIRD, "R", 0.3), math.exp(0.3) + 0.09),
    (_sum("square+neg_square", SQUARE, NEG_SQUARE, "[-1,1]", 0.2), 0.0),
)

# problems min f1 + f2 over a convex set
SUM_PROBLEMS = (
    _sum("reciprocal+neg_abs", SHIFTED_RECIPROCAL, NEG_ABS, "[-1/2,0]", 0.0),
    _sum("cube+zero", CUBE_THIRD, ZERO, "[0,1]", 0.0),
    _sum("square+abs", SQUARE, ABS, "[-1,1]", 0.0),
    _sum("zero+zero", ZERO, ZERO, "[0,1]", 0.5),
)

# (name, f, a, b) segments for the mean-value checks
SEGMENTS = (
    ("cube_third", CUBE_THIRD, [0.0], [1.0]),
    ("indicator_unit", INDICATOR_UNIT, [0.0], [1.0]),
    ("affine", fn("2*x", "affine"), [0.0], [1.0]),
    ("abs", ABS, [-1.0], [1.0]),
    ("neg_square", NEG_SQUARE, [-1.0], [1.0]),
    ("exp_minus_one", EXP_MINUS_ONE, [-1.0], [0.5]),
    ("shifted_reciprocal", SHIFTED_RECIPROCAL, [-0.5], [0.0]),
    ("neg_abs_reversed", NEG_ABS, [1.0], [-1.0]),
    ("plane", fn("x + y", "plane", dim=2), [0.0, 0.0], [1.0, 1.0]),
    ("abs_plus_square", fn("abs(x) + y^2", "abs_plus_square", dim=2), [-1.0, -0.5], [1.0, 0.5]),
)

# (name, f, a, b, convex?) for the convexity/monotonicity equivalence
EQUIVALENCE = (
    ("cube_third", CUBE_THIRD, 0.0, 1.0, True),
    ("abs", ABS, -1.0, 1.0, True),
    ("square", SQUARE, -1.0, 2.0, True),
    ("exp", fn("exp(x)", "exp"), -1.0, 1.0, True),
    ("max_affine", fn([("(-inf,0]", "x"), ("(0,inf)", "2*x")], "max_affine"), -1.0, 1.0, True),
    ("reciprocal", fn([("x > -1", "1/(x+1)")], "reciprocal"), 0.0, 1.0, True),
    ("neg_square", NEG_SQUARE, -1.0, 1.0, False),
    ("cube_third_wide", CUBE_THIRD, -1.0, 1.0, False),
    ("neg_abs", NEG_ABS, -1.0, 1.0, False),
    ("neg_exp", fn("-exp(x)", "neg_exp"), 0.0, 1.0, False),
    ("min_affine", fn([("(-inf,0]", "2*x"), ("(0,inf)", "x")], "min_affine"), -1.0, 1.0, False),
    ("cubic_wave", fn("x^3 - x", "cubic_wave"), -1.0, 1.0, False),
)
