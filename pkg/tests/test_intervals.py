import math

import pytest
from hypothesis import given, strategies as st

from relsub.errors import DSLSyntaxError
from relsub.extreal import INF, NEG_INF, ext_add, ext_mul, ext_sub, fmt
from relsub.intervals import (Interval, IntervalSet, hausdorff, iset_minkowski,
                              parse_intervalset)

P = parse_intervalset


def test_infinity_minus_infinity_is_plus_infinity():
    assert ext_sub(INF, INF) == INF
    assert ext_add(NEG_INF, INF) == INF
    assert ext_add(NEG_INF, NEG_INF) == NEG_INF


def test_zero_times_infinity():
    assert ext_mul(0.0, INF) == 0.0
    assert ext_mul(-2.0, INF) == NEG_INF


def test_fmt_round_trip():
    for v in (INF, NEG_INF, 0.5, -3.0, 1e-17):
        assert float(fmt(v)) == v


def test_canonical_merge():
    assert IntervalSet.of((0, 1), (0.5, 2)) == P("[0,2]")
    assert P("[0,1) | [1,2]") == P("[0,2]")
    # open at a shared endpoint stays split
    assert len(P("[0,1) | (1,2]")) == 2


def test_parse_forms():
    assert P("{}").is_empty
    assert P("R") == IntervalSet.real_line()
    assert P("{1/3}") == IntervalSet.point(1 / 3)
    s = P("[0,1) | {3} | (4,inf)")
    assert str(s) == "[0, 1) | {3} | (4, inf)"
    assert s.contains(3) and not s.contains(1) and s.contains(1e9)


@pytest.mark.parametrize("text", ["[1,0]", "[0,1", "{a}", "(0,1]]"])
def test_parse_rejects(text):
    with pytest.raises((DSLSyntaxError, ValueError)):
        P(text)


def test_complement_and_difference():
    s = P("[0,1) | {3} | (4,inf)")
    assert s.complement() == P("(-inf,0) | [1,3) | (3,4]")
    assert P("[0,2]").difference(P("(0,1)")) == P("{0} | [1,2]")


def test_minkowski_and_affine():
    assert iset_minkowski(P("[0,1]"), P("{-1} | [5,6]")) == P("[-1,0] | [5,7]")
    assert iset_minkowski(P("[0,inf)"), P("{1}")) == P("[1,inf)")
    assert iset_minkowski(P("{}"), P("R")).is_empty
    assert P("[1,2)").affine(-2.0, 1.0) == P("(-3,-1]")


def test_distance_and_nearest():
    s = P("(-inf,-1] | [2,3]")
    assert s.distance(0.0) == 1.0
    assert s.nearest(0.6) == 2.0
    assert P("{}").distance(0.0) == INF


def test_hausdorff():
    assert hausdorff(P("[0,1]"), P("[0,2]")) == 1.0
    assert hausdorff(P("{0}"), P("{0}")) == 0.0
    assert hausdorff(P("[0,inf)"), P("[1e-4,inf)")) == pytest.approx(1e-4)
    # unbounded parts are clipped one unit past the last finite endpoint
    assert hausdorff(P("[0,inf)"), P("[0,1]")) == 1.0
    assert hausdorff(P("[0,inf)"), P("[0,1]"), window=10.0) == 9.0
    assert hausdorff(P("{}"), P("{0}")) == INF


def test_json_round_trip():
    s = P("(-inf,0) | {1/2} | [3,inf)")
    assert IntervalSet.from_json(s.to_json()) == s


def test_interval_point():
    assert Interval(1.0, 1.0, True, True).is_point


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@st.composite
def isets(draw):
    parts = []
    for _ in range(draw(st.integers(0, 4))):
        a, b = sorted((draw(finite), draw(finite)))
        lo = draw(st.sampled_from([a, NEG_INF])) if draw(st.booleans()) else a
        hi = draw(st.sampled_from([b, INF])) if draw(st.booleans()) else b
        lc = draw(st.booleans()) and math.isfinite(lo)
        hc = draw(st.booleans()) and math.isfinite(hi)
        if lo == hi:
            lc = hc = True
        parts.append(Interval(lo, hi, lc, hc))
    return IntervalSet(parts)


@given(isets())
def test_text_round_trip(s):
    assert P(str(s)) == s


@given(isets(), isets())
def test_union_intersection_complement(a, b):
    assert a.union(b).complement() == a.complement().intersect(b.complement())
    assert a.intersect(b).issubset(a) and a.issubset(a.union(b))


@given(isets(), finite)
def test_complement_partitions_line(s, x):
    assert s.contains(x) != s.complement().contains(x)


@given(isets(), isets(), finite)
def test_minkowski_membership(a, b, x):
    if a.contains(x):
        for p in b.parts:
            y = p.lo if p.lo_closed else (p.hi if p.hi_closed else None)
            if y is not None and math.isfinite(y):
                assert iset_minkowski(a, b).contains(x + y, 1e-9)


@given(isets(), finite)
def test_distance_matches_nearest(s, x):
    if not s.is_empty:
        assert s.distance(x) == pytest.approx(abs(s.nearest(x) - x), abs=1e-9)
