"""Exact relative subdifferentials of 1-D piecewise functions.

At ``(xbar, f(xbar))`` the epigraph of ``f_Omega`` has a tangent cone made
of the upward ray plus, on each side, either nothing (the side is not in
the domain or ``f`` jumps up), a slope sector bounded by ``(+-1, slope)``
and the upward ray, or a half-plane (``f`` jumps down, equals ``-inf`` or
falls vertically). For the functional ``p = (s, -1)`` the normalized
limsup pairing over the epigraph equals the largest pairing of ``p`` with a
unit tangent direction, which on a sector ``K = cone{r1, r2}`` is ``|p|``
when ``p`` lies in ``K`` and the larger ray pairing otherwise. Each sector
therefore contributes an explicit interval condition on ``s`` for every
``eps >= 0``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EvaluationError
from .expr import Expr, eval_scalar, try_eval
from .extreal import INF, NEG_INF, fmt
from .intervals import IntervalSet
from .piecewise import PiecewiseFunc, pull_back_segment, smooth_piece_at
from .sets import ClosedSet, Interval1D, Segment, as_closed_set

EXACT = "exact"

KIND_ALIASES = {
    "eps_regular": "eps_regular",
    "regular": "eps_regular",
    "limiting": "limiting_relative",
    "limiting_relative": "limiting_relative",
    "plain": "limiting_plain",
    "limiting_plain": "limiting_plain",
}


def canonical_kind(kind: str) -> str:
    try:
        return KIND_ALIASES[kind]
    except KeyError:
        raise ValueError(f"unknown subdifferential kind {kind!r}") from None


@dataclass(frozen=True)
class SideInfo:
    """Local shape of the epigraph on one side of ``xbar``.

    ``shape`` is ``"none"``, ``"slope"`` or ``"half"``; ``slope`` is the
    one-sided derivative for ``"slope"``; ``continuous`` tells whether
    ``f_Omega`` tends to ``f(xbar)`` on that side.
    """

    accessible: bool
    shape: str
    slope: float = math.nan
    continuous: bool = False


@dataclass(frozen=True)
class DiniData:
    d_plus: float
    d_minus: float
    right_accessible: bool
    left_accessible: bool
    value: float
    right: SideInfo = field(repr=False, compare=False, default=None)
    left: SideInfo = field(repr=False, compare=False, default=None)


@dataclass(frozen=True)
class SubdiffSet:
    set: IntervalSet
    kind: str
    eps: float | None = None
    direction: tuple = (1.0,)
    exactness: str = EXACT
    tol: float = 0.0
    flags: dict = field(default_factory=dict, compare=False)

    @property
    def is_exact(self) -> bool:
        return self.exactness == EXACT

    @property
    def left_unbounded(self) -> bool:
        return self.set.left_unbounded

    @property
    def right_unbounded(self) -> bool:
        return self.set.right_unbounded

    def vectors(self):
        """Endpoint description as vectors ``sigma * direction`` (finite endpoints only)."""
        u = np.asarray(self.direction)
        return [(p.lo * u).tolist() if math.isfinite(p.lo) else None for p in self.set.parts]

    def to_json(self) -> dict:
        out = {"set": str(self.set), "kind": self.kind}
        if self.eps is not None:
            out["eps"] = fmt(self.eps)
        if len(self.direction) > 1:
            out["direction"] = [float(v) for v in self.direction]
        out["exactness"] = self.exactness
        if self.exactness != EXACT:
            out["tol"] = self.tol
        out["left_unbounded"] = self.left_unbounded
        out["right_unbounded"] = self.right_unbounded
        for k, v in self.flags.items():
            out[k] = v
        return out


# -- one-sided analysis -------------------------------------------------------

def _side_limit(e: Expr, x: float, sign: float) -> float:
    """``lim e(x + sign*t)`` as ``t`` decreases to 0, poles resolved by sign sampling."""
    try:
        v = eval_scalar(e, x)
    except EvaluationError:
        v = math.nan
    if not math.isnan(v):
        return v
    scale = max(1.0, abs(x))
    vals = [try_eval(e, x + sign * t * scale) for t in (1e-6, 1e-8, 1e-10)]
    finite = [v for v in vals if not math.isnan(v)]
    if not finite:
        raise EvaluationError(f"cannot determine the limit of {e} at {fmt(x)}")
    last = finite[-1]
    if math.isinf(last):
        return last
    if len(finite) >= 2 and abs(last) > abs(finite[0]) * 10:
        return INF if last > 0 else NEG_INF
    return last


def _side_info(fo: PiecewiseFunc, x: float, fbar: float, side: str) -> SideInfo:
    sp = smooth_piece_at(fo, x, side)
    if sp is None:
        return SideInfo(False, "none")
    sign = 1.0 if side == "right" else -1.0
    limit = _side_limit(sp.expr, x, sign)
    if limit == INF:
        return SideInfo(False, "none")
    if limit == NEG_INF:
        return SideInfo(True, "half")
    tol = 1e-12 * max(1.0, abs(fbar))
    if limit > fbar + tol:
        return SideInfo(True, "none")
    if limit < fbar - tol:
        return SideInfo(True, "half")
    slope = _side_limit(sp.deriv, x, sign)
    if math.isinf(slope):
        # vertical tangent: rising side is invisible, falling side fills a half-plane
        rising = slope > 0 if side == "right" else slope < 0
        return SideInfo(True, "none" if rising else "half", slope, True)
    return SideInfo(True, "slope", slope, True)


@functools.lru_cache(maxsize=4096)
def _restricted(f: PiecewiseFunc, omega: ClosedSet) -> PiecewiseFunc:
    return f.restrict(omega)


def _prepare(f: PiecewiseFunc, omega, xbar):
    omega = as_closed_set(omega)
    if f.dim != 1 or omega.dim != 1:
        raise ValueError("the exact engine handles 1-D problems; use segment_subdiff in R^n")
    x = float(np.ravel(np.asarray(xbar, dtype=float))[0])
    if not omega.contains(x, 0.0):
        raise DomainError(f"{fmt(x)} is not in {omega.describe()}")
    fo = _restricted(f, omega)
    fbar = fo(x) + 0.0  # drop a negative zero
    if not math.isfinite(fbar):
        raise DomainError(f"{f.name}({fmt(x)}) = {fmt(fbar)} is not finite")
    return fo, omega, x, fbar


@functools.lru_cache(maxsize=4096)
def _dini_cached(f, omega, x):
    fo, omega, x, fbar = _prepare(f, omega, x)
    right = _side_info(fo, x, fbar, "right")
    left = _side_info(fo, x, fbar, "left")

    def quotient(info, sign):
        if info.shape == "none":
            return INF
        if info.shape == "half":
            return NEG_INF
        return sign * info.slope

    return DiniData(quotient(right, 1.0), quotient(left, -1.0), right.accessible, left.accessible,
                    fbar, right, left)


def dini(f: PiecewiseFunc, omega, xbar) -> DiniData:
    """Lower Dini quotients of ``f_Omega`` at ``xbar`` from both sides."""
    omega = as_closed_set(omega)
    return _dini_cached(f, omega, float(np.ravel(np.asarray(xbar, dtype=float))[0]))


# -- sector geometry ----------------------------------------------------------

def _halfline_le(a: float, b: float) -> IntervalSet:
    """``{s : a*s <= b}``."""
    if a == 0.0:
        return IntervalSet.real_line() if b >= 0 else IntervalSet.empty()
    t = b / a
    return IntervalSet.of((NEG_INF, t)) if a > 0 else IntervalSet.of((t, INF))


def _halfline_ge(a: float, b: float) -> IntervalSet:
    return _halfline_le(-a, -b)


def _sector_set(r1, r2, eps: float) -> IntervalSet:
    """``{s : sup over unit w in cone{r1, r2} of <(s, -1), w> <= eps}``; ``r1`` to ``r2`` counterclockwise."""
    lin = IntervalSet.real_line()
    for rx, ry in (r1, r2):
        # s*rx - ry <= eps*|r|
        lin = lin.intersect(_halfline_le(rx, ry + eps * math.hypot(rx, ry)))
    # p = (s, -1) in the cone: cross(r1, p) >= 0 and cross(p, r2) >= 0
    inside = _halfline_le(r1[1], -r1[0]).intersect(_halfline_ge(r2[1], -r2[0]))
    if eps >= 1.0:
        w = math.sqrt(eps * eps - 1.0)
        ball = IntervalSet.closed(-w, w)
    else:
        ball = IntervalSet.empty()
    return lin.difference(inside).union(inside.intersect(ball)).closure()


def _side_sectors(info: SideInfo, side: str) -> list:
    if info.shape == "none":
        return []
    if side == "right":
        if info.shape == "slope":
            return [((1.0, info.slope), (0.0, 1.0))]
        return [((0.0, -1.0), (1.0, 0.0)), ((1.0, 0.0), (0.0, 1.0))]
    if info.shape == "slope":
        return [((0.0, 1.0), (-1.0, -info.slope))]
    return [((0.0, 1.0), (-1.0, 0.0)), ((-1.0, 0.0), (0.0, -1.0))]


def geometric_eps_subdiff(d: DiniData, eps: float) -> IntervalSet:
    """Geometric ``eps``-subgradients of ``f_Omega`` (no tangent filtering)."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if eps == 0.0:
        # exact float endpoints from the Dini quotients
        lo, hi = -d.d_minus, d.d_plus
        return IntervalSet.of((lo, hi)) if lo <= hi else IntervalSet.empty()
    acc = IntervalSet.real_line()
    for side, info in (("right", d.right), ("left", d.left)):
        for r1, r2 in _side_sectors(info, side):
            acc = acc.intersect(_sector_set(r1, r2, eps))
    return acc


# -- public operations --------------------------------------------------------

def regular_subdiff_fomega(f: PiecewiseFunc, omega, xbar) -> SubdiffSet:
    d = dini(f, omega, xbar)
    return SubdiffSet(geometric_eps_subdiff(d, 0.0), "regular_fomega", 0.0)


def tangent_interval(omega, xbar) -> IntervalSet:
    return as_closed_set(omega).tangent_cone(xbar).to_intervalset()


def eps_regular_relative(f: PiecewiseFunc, omega, xbar, eps: float = 0.0) -> SubdiffSet:
    """``eps``-regular subdifferential of ``f`` relative to ``omega`` at ``xbar``."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    d = dini(f, omega, xbar)
    s = geometric_eps_subdiff(d, float(eps)).intersect(tangent_interval(omega, xbar))
    return SubdiffSet(s, "eps_regular", float(eps))


def side_limits(f: PiecewiseFunc, omega, xbar) -> IntervalSet:
    """Derivative limits along sides where ``f_Omega`` is continuous with finite slope."""
    d = dini(f, omega, xbar)
    acc = IntervalSet.empty()
    for info in (d.right, d.left):
        if info.shape == "slope" and info.continuous:
            acc = acc.union(IntervalSet.point(info.slope))
    return acc


def limiting_relative(f: PiecewiseFunc, omega, xbar) -> SubdiffSet:
    """Limiting subdifferential relative to ``omega``.

    Approaches staying at ``xbar`` give the regular relative set; approaches
    through a neighbouring smooth piece interior to ``omega`` give the
    one-sided derivative there. No other sequence keeps ``f(x_k) -> f(xbar)``.
    """
    base = eps_regular_relative(f, omega, xbar, 0.0).set
    return SubdiffSet(base.union(side_limits(f, omega, xbar)).closure(), "limiting_relative")


def limiting_plain(f: PiecewiseFunc, omega, xbar) -> SubdiffSet:
    """Limiting subdifferential of ``f_Omega`` (no tangent-cone filtering)."""
    base = regular_subdiff_fomega(f, omega, xbar).set
    return SubdiffSet(base.union(side_limits(f, omega, xbar)).closure(), "limiting_plain")


def subdiff(f: PiecewiseFunc, omega, xbar, kind: str = "limiting", eps: float = 0.0) -> SubdiffSet:
    kind = canonical_kind(kind)
    if kind == "eps_regular":
        return eps_regular_relative(f, omega, xbar, eps)
    if kind == "limiting_relative":
        return limiting_relative(f, omega, xbar)
    return limiting_plain(f, omega, xbar)


def segment_subdiff(f: PiecewiseFunc, a, b, xbar, kind: str = "limiting", eps: float = 0.0) -> SubdiffSet:
    """Subdifferential on the segment ``[a, b]`` via the arclength pull-back.

    The returned interval holds coefficients ``sigma`` of ``sigma * u`` with
    ``u = (b - a)/|b - a|``. For the plain kind only the ``u``-component is
    reported; components orthogonal to the segment are unrestricted there.
    """
    seg = Segment(a, b)
    x = np.ravel(np.asarray(xbar, dtype=float))
    if seg.distance(x) > 1e-9:
        raise DomainError(f"{x.tolist()} is off the segment")
    g = pull_back_segment(f, seg.a, seg.b)
    s0 = seg.param(x)
    if abs(s0) < 1e-12 * max(1.0, seg.length):
        s0 = 0.0
    elif abs(s0 - seg.length) < 1e-12 * max(1.0, seg.length):
        s0 = seg.length
    omega = Interval1D(IntervalSet.closed(0.0, seg.length))
    res = subdiff(g, omega, s0, kind, eps)
    return SubdiffSet(res.set, res.kind, res.eps, tuple(float(v) for v in seg.direction))
