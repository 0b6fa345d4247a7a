"""Guard predicates for function pieces.

In one dimension a guard is simply an :class:`IntervalSet` (open, closed or
half-open parts are all allowed). In higher dimensions guards are regions:
half-spaces, intersections, named closed sets and unions, each able to
test membership of many points and to pull itself back along a line.

Guard text grammar::

    guard   := term ("|" term)*
    term    := item ("&" item)*
    item    := interval literal | set name | comparison chain

Comparisons must be affine in the variables, e.g. ``x > -1`` or
``-1 <= x + y <= 2``.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass

import numpy as np

from .errors import DSLSyntaxError
from .expr import _convert, linear_form, sub
from .extreal import INF, NEG_INF
from .intervals import IntervalSet, parse_interval_term, split_top_level

_BOUNDARY_TOL = 1e-12


def iset_contains_many(iset: IntervalSet, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float).ravel()
    out = np.zeros(xs.shape[0], dtype=bool)
    for p in iset.parts:
        lo_ok = xs >= p.lo if p.lo_closed else xs > p.lo
        hi_ok = xs <= p.hi if p.hi_closed else xs < p.hi
        out |= lo_ok & hi_ok
    return out


def _halfline(a: float, b: float, strict: bool) -> IntervalSet:
    """``{s : a*s <= b}`` (``<`` when strict)."""
    if a == 0.0:
        ok = (0.0 < b) if strict else (0.0 <= b)
        return IntervalSet.real_line() if ok else IntervalSet.empty()
    t = b / a
    if a > 0:
        return IntervalSet.of((NEG_INF, t, False, not strict))
    return IntervalSet.of((t, INF, not strict, False))


class Region:
    """Membership predicate over R^n."""

    dim: int

    def contains_many(self, X) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def contains(self, x) -> bool:
        return bool(self.contains_many(np.atleast_2d(np.asarray(x, dtype=float)))[0])

    def pullback(self, a, u) -> IntervalSet:  # pragma: no cover - abstract
        """Parameters ``s`` with ``a + s*u`` inside the region."""
        raise NotImplementedError


@dataclass(frozen=True)
class HalfSpace(Region):
    normal: tuple
    offset: float
    strict: bool = False

    @property
    def dim(self):
        return len(self.normal)

    def contains_many(self, X):
        v = np.asarray(X, dtype=float) @ np.asarray(self.normal)
        return v < self.offset if self.strict else v <= self.offset

    def pullback(self, a, u):
        n = np.asarray(self.normal)
        return _halfline(float(n @ u), self.offset - float(n @ a), self.strict)


@dataclass(frozen=True)
class Everything(Region):
    dim: int

    def contains_many(self, X):
        return np.ones(np.asarray(X).shape[0], dtype=bool)

    def pullback(self, a, u):
        return IntervalSet.real_line()


@dataclass(frozen=True)
class Intersection(Region):
    items: tuple

    @property
    def dim(self):
        return self.items[0].dim

    def contains_many(self, X):
        out = np.ones(np.asarray(X).shape[0], dtype=bool)
        for r in self.items:
            out &= r.contains_many(X)
        return out

    def pullback(self, a, u):
        acc = IntervalSet.real_line()
        for r in self.items:
            acc = acc.intersect(r.pullback(a, u))
        return acc


@dataclass(frozen=True)
class UnionRegion(Region):
    items: tuple

    @property
    def dim(self):
        return self.items[0].dim

    def contains_many(self, X):
        out = np.zeros(np.asarray(X).shape[0], dtype=bool)
        for r in self.items:
            out |= r.contains_many(X)
        return out

    def pullback(self, a, u):
        acc = IntervalSet.empty()
        for r in self.items:
            acc = acc.union(r.pullback(a, u))
        return acc


@dataclass(frozen=True)
class SetRegion(Region):
    """A named closed set used as a guard."""

    closed_set: object

    @property
    def dim(self):
        return self.closed_set.dim

    def contains_many(self, X):
        X = np.asarray(X, dtype=float)
        return np.array([self.closed_set.contains(x, _BOUNDARY_TOL) for x in X], dtype=bool)

    def pullback(self, a, u):
        from .sets import Box, FiniteUnion, Interval1D, PolytopeH, Segment
        S = self.closed_set
        a = np.asarray(a, dtype=float)
        u = np.asarray(u, dtype=float)
        if isinstance(S, FiniteUnion):
            return UnionRegion(tuple(SetRegion(m) for m in S.members)).pullback(a, u)
        if isinstance(S, Interval1D):
            if u[0] == 0.0:
                return IntervalSet.real_line() if S.parts.contains(a[0]) else IntervalSet.empty()
            return S.parts.affine(1.0 / u[0], -a[0] / u[0])
        if isinstance(S, Box):
            A = np.vstack([np.eye(S.dim), -np.eye(S.dim)])
            b = np.concatenate([S.hi, -S.lo])
            return _polyhedron_pullback(A, b, a, u)
        if isinstance(S, PolytopeH):
            return _polyhedron_pullback(S.A, S.b, a, u)
        if isinstance(S, Segment):
            return _segment_pullback(S, a, u)
        raise TypeError(f"cannot pull back {type(S).__name__}")


def _polyhedron_pullback(A, b, a, u):
    acc = IntervalSet.real_line()
    for row, c in zip(A, b):
        acc = acc.intersect(_halfline(float(row @ u), float(c - row @ a), False))
    return acc


def _segment_pullback(S, a, u):
    d = S.direction
    w = a - S.a
    cross = u - float(u @ d) * d
    if np.linalg.norm(cross) < 1e-12:
        # parallel lines: either disjoint or overlapping in an interval
        off = w - float(w @ d) * d
        if np.linalg.norm(off) > 1e-12:
            return IntervalSet.empty()
        k = float(u @ d)
        t0 = float(w @ d)
        return IntervalSet.closed(0.0, S.length).affine(1.0 / k, -t0 / k)
    s, *_ = np.linalg.lstsq(np.column_stack([u, -d]), -w, rcond=None)
    p = a + s[0] * u
    if S.contains(p, 1e-10):
        return IntervalSet.point(float(s[0]))
    return IntervalSet.empty()


# -- parsing ------------------------------------------------------------------

def _comparison_items(text: str, whole: str, dim: int) -> list:
    """Half-spaces for one comparison chain such as ``-1 < x <= 0``."""
    src = text.replace("^", "**").strip()
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise DSLSyntaxError(f"cannot parse guard item {text.strip()!r}", whole,
                             exc.offset) from None
    node = tree.body
    if not isinstance(node, ast.Compare):
        raise DSLSyntaxError(f"guard item {text.strip()!r} is neither a set nor a comparison", whole)
    operands = [_convert(node.left, whole, dim)] + [_convert(c, whole, dim) for c in node.comparators]
    out = []
    for op, lhs, rhs in zip(node.ops, operands, operands[1:]):
        form = linear_form(sub(lhs, rhs), dim)
        if form is None:
            raise DSLSyntaxError(f"comparison {text.strip()!r} must be affine in the variables", whole)
        coeffs, c = form
        coeffs = tuple(float(v) for v in coeffs)
        neg = tuple(-v for v in coeffs)
        if isinstance(op, ast.Lt):
            out.append(HalfSpace(coeffs, -c, True))
        elif isinstance(op, ast.LtE):
            out.append(HalfSpace(coeffs, -c, False))
        elif isinstance(op, ast.Gt):
            out.append(HalfSpace(neg, c, True))
        elif isinstance(op, ast.GtE):
            out.append(HalfSpace(neg, c, False))
        elif isinstance(op, ast.Eq):
            out.extend([HalfSpace(coeffs, -c, False), HalfSpace(neg, c, False)])
        else:
            raise DSLSyntaxError(f"unsupported comparison operator in {text.strip()!r}", whole)
    return out


def _halfspace_to_iset(h: HalfSpace) -> IntervalSet:
    return _halfline(h.normal[0], h.offset, h.strict)


def parse_guard(text: str, dim: int = 1, sets: dict | None = None):
    """Parse guard text; returns an :class:`IntervalSet` in 1-D, a :class:`Region` otherwise."""
    if not isinstance(text, str) or not text.strip():
        raise DSLSyntaxError("empty guard", text)
    sets = sets or {}
    terms = []
    for term in split_top_level(text, "|"):
        items = []
        for item in split_top_level(term, "&"):
            name = item.strip()
            if not name:
                raise DSLSyntaxError("empty guard item", text)
            if name in sets:
                S = sets[name]
                if S.dim != dim:
                    raise DSLSyntaxError(f"set {name!r} has dimension {S.dim}, expected {dim}", text)
                items.append(S.as_intervalset() if dim == 1 else SetRegion(S))
                continue
            lit = parse_interval_term(name, text) if name[0] in "[({" or name in ("R", "ℝ") else None
            if lit is not None:
                if dim != 1:
                    raise DSLSyntaxError("interval literals are only valid in one dimension", text)
                items.append(lit)
                continue
            if name.isidentifier() and name not in ("x", "y", "z"):
                raise DSLSyntaxError(f"unknown set name {name!r}", text)
            hs = _comparison_items(name, text, dim)
            if dim == 1:
                hs = [_halfspace_to_iset(h) for h in hs]
            items.extend(hs)
        if dim == 1:
            acc = IntervalSet.real_line()
            for it in items:
                acc = acc.intersect(it)
            terms.append(acc)
        else:
            terms.append(items[0] if len(items) == 1 else Intersection(tuple(items)))
    if dim == 1:
        acc = IntervalSet.empty()
        for t in terms:
            acc = acc.union(t)
        return acc
    return terms[0] if len(terms) == 1 else UnionRegion(tuple(terms))


def guard_contains_many(guard, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if isinstance(guard, IntervalSet):
        return iset_contains_many(guard, X.reshape(X.shape[0], -1)[:, 0])
    return guard.contains_many(X.reshape(X.shape[0], -1))


def guard_str(guard) -> str:
    if isinstance(guard, IntervalSet):
        return str(guard)
    if isinstance(guard, HalfSpace):
        return f"{list(guard.normal)}.x {'<' if guard.strict else '<='} {guard.offset!r}"
    if isinstance(guard, Intersection):
        return " & ".join(guard_str(g) for g in guard.items)
    if isinstance(guard, UnionRegion):
        return " | ".join(guard_str(g) for g in guard.items)
    if isinstance(guard, SetRegion):
        return guard.closed_set.describe()
    return "R^n"

