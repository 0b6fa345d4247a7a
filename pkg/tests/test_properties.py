"""Randomized invariants over piecewise functions with kinks and jumps."""

import math

from hypothesis import HealthCheck, assume, given, settings, strategies as st

from relsub.calculus import (inclusion_chain_check, lipschitz_bound_check, scalar_rule_check,
                             sets_close, sum_rule_check)
from relsub.funcdsl import make_function, make_set
from relsub.subdiff import subdiff

SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])

coef = st.integers(-4, 4).map(lambda k: k / 2)
cut = st.integers(-6, 6).map(lambda k: k / 4)


def _end(v):
    return "inf" if v == math.inf else "-inf" if v == -math.inf else repr(v)


@st.composite
def piecewise(draw, continuous=False):
    """Piecewise quadratic on the line, optionally continuous; cuts at quarter points."""
    cuts = sorted(set(draw(st.lists(cut, max_size=3))))
    bounds = [-math.inf] + cuts + [math.inf]
    pieces, prev_closed, left = [], False, None
    for lo, hi in zip(bounds, bounds[1:]):
        a, b, c = draw(coef), draw(coef), draw(coef)
        if continuous and left is not None:
            c = left - (a * lo * lo + b * lo)
        closed = continuous or draw(st.booleans())
        opening = "(" if lo == -math.inf or prev_closed else "["
        closing = "]" if closed and hi != math.inf else ")"
        pieces.append((f"{opening}{_end(lo)},{_end(hi)}{closing}", f"{a!r}*x^2 + {b!r}*x + {c!r}"))
        prev_closed = closed
        if hi != math.inf:
            left = a * hi * hi + b * hi + c
    return make_function(pieces)


@st.composite
def triple(draw, continuous=False):
    f = draw(piecewise(continuous))
    lo = draw(st.sampled_from([-math.inf, -1.0, -0.5, 0.0]))
    hi = draw(st.sampled_from([0.0, 0.5, 1.0, math.inf]))
    assume(lo < hi)
    omega = make_set(f"{'(' if lo == -math.inf else '['}{_end(lo)},{_end(hi)}{')' if hi == math.inf else ']'}")
    choices = [v for v in (-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0) if lo <= v <= hi]
    x = draw(st.sampled_from(choices))
    return f, omega, x


@SETTINGS
@given(triple())
def test_inclusion_chain(t):
    assert inclusion_chain_check(*t).holds


@SETTINGS
@given(triple(), st.sampled_from([0.0, 0.1, 0.5]), st.sampled_from([0.1, 0.5, 1.0]))
def test_eps_monotone(t, e1, de):
    small = subdiff(*t, "eps_regular", e1).set
    big = subdiff(*t, "eps_regular", e1 + de).set
    assert small.issubset(big, 1e-9)


@SETTINGS
@given(triple(), st.sampled_from([-1.0, 1.0, 10.0]), st.sampled_from(["eps_regular", "limiting", "plain"]))
def test_shift_invariance(t, c, kind):
    f, omega, x = t
    assert sets_close(subdiff(f, omega, x, kind, 0.1 if kind == "eps_regular" else 0.0).set,
                      subdiff(f.shift(c), omega, x, kind, 0.1 if kind == "eps_regular" else 0.0).set)


@SETTINGS
@given(triple(), st.sampled_from([0.5, 1.0, 2.0, 10.0]), st.sampled_from([0.0, 0.1, 1.0]))
def test_scalar_sandwich(t, lam, eps):
    assert scalar_rule_check(*t, lam, eps).holds


@SETTINGS
@given(triple(continuous=True), st.sampled_from([0.0, 0.1]))
def test_lipschitz_bound(t, eps):
    f, omega, x = t
    r = lipschitz_bound_check(f, omega, x, eps, radius=0.25)
    assert r.verdict in ("holds", "inconclusive")


@SETTINGS
@given(triple(continuous=True))
def test_nonempty_when_lipschitz(t):
    assert not subdiff(*t, "limiting").set.is_empty


@SETTINGS
@given(triple(continuous=True), triple())
def test_sum_rule_never_fails(t1, t2):
    f1, omega, x = t1
    assert sum_rule_check(f1, t2[0], omega, x).verdict in ("holds", "inconclusive")
