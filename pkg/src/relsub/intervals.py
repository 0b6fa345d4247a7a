"""Finite unions of real intervals in canonical form.

An :class:`IntervalSet` is the exact carrier for every 1-D answer in the
package: subdifferentials, tangent cones and normal sets. Parts are kept
sorted, pairwise disjoint and non-adjacent, so structural equality is set
equality.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DSLSyntaxError, InconclusiveLimit
from .extreal import INF, NEG_INF, ext_add, fmt


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if lo > hi:
            raise ValueError(f"empty interval lo={lo} > hi={hi}")
        if lo == INF or hi == NEG_INF:
            raise ValueError("interval cannot sit at infinity")
        lc = bool(self.lo_closed) and lo != NEG_INF
        hc = bool(self.hi_closed) and hi != INF
        if lo == hi and not (lc and hc):
            raise ValueError("degenerate interval must be closed")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "lo_closed", lc)
        object.__setattr__(self, "hi_closed", hc)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        if tol > 0.0:
            return self.lo - tol <= x <= self.hi + tol
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def __str__(self):
        if self.is_point:
            return "{" + fmt(self.lo) + "}"
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{fmt(self.lo)}, {fmt(self.hi)}{right}"


def make_interval(lo, hi, lo_closed=True, hi_closed=True):
    """Interval or ``None`` when the description is empty."""
    lo, hi = float(lo), float(hi)
    if lo > hi or lo == INF or hi == NEG_INF:
        return None
    if lo == NEG_INF:
        lo_closed = False
    if hi == INF:
        hi_closed = False
    if lo == hi and not (lo_closed and hi_closed):
        return None
    return Interval(lo, hi, lo_closed, hi_closed)


def _canonical(parts: Iterable[Interval]) -> tuple:
    items = sorted(parts, key=lambda p: (p.lo, not p.lo_closed))
    out = []
    for p in items:
        if out:
            cur = out[-1]
            touches = p.lo < cur.hi or (p.lo == cur.hi and (cur.hi_closed or p.lo_closed))
            if touches:
                if p.hi > cur.hi:
                    hi, hc = p.hi, p.hi_closed
                elif p.hi == cur.hi:
                    hi, hc = cur.hi, cur.hi_closed or p.hi_closed
                else:
                    hi, hc = cur.hi, cur.hi_closed
                out[-1] = Interval(cur.lo, hi, cur.lo_closed, hc)
                continue
        out.append(p)
    return tuple(out)


@dataclass(frozen=True)
class IntervalSet:
    """Canonical finite union of intervals; ``IntervalSet()`` is the empty set."""

    parts: tuple = ()

    def __post_init__(self):
        parts = tuple(self.parts)
        for p in parts:
            if not isinstance(p, Interval):
                raise TypeError("IntervalSet parts must be Interval instances")
        object.__setattr__(self, "parts", _canonical(parts))

    # constructors
    @classmethod
    def empty(cls):
        return cls(())

    @classmethod
    def real_line(cls):
        return cls((Interval(NEG_INF, INF, False, False),))

    @classmethod
    def point(cls, a):
        return cls((Interval(a, a),))

    @classmethod
    def closed(cls, lo, hi):
        iv = make_interval(lo, hi, True, True)
        return cls(() if iv is None else (iv,))

    @classmethod
    def of(cls, *specs):
        """Build from ``(lo, hi)`` or ``(lo, hi, lo_closed, hi_closed)`` tuples."""
        parts = []
        for s in specs:
            iv = make_interval(*s)
            if iv is not None:
                parts.append(iv)
        return cls(tuple(parts))

    # queries
    @property
    def is_empty(self) -> bool:
        return not self.parts

    def __bool__(self):
        return bool(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return any(p.contains(x, tol) for p in self.parts)

    __contains__ = contains

    @property
    def inf(self) -> float:
        return self.parts[0].lo if self.parts else INF

    @property
    def sup(self) -> float:
        return self.parts[-1].hi if self.parts else NEG_INF

    @property
    def left_unbounded(self) -> bool:
        return bool(self.parts) and self.parts[0].lo == NEG_INF

    @property
    def right_unbounded(self) -> bool:
        return bool(self.parts) and self.parts[-1].hi == INF

    @property
    def is_closed(self) -> bool:
        return all((p.lo_closed or p.lo == NEG_INF) and (p.hi_closed or p.hi == INF)
                   for p in self.parts)

    def closure(self) -> "IntervalSet":
        return IntervalSet(tuple(Interval(p.lo, p.hi, True, True) for p in self.parts))

    def finite_endpoints(self):
        out = []
        for p in self.parts:
            for e in (p.lo, p.hi):
                if math.isfinite(e):
                    out.append(e)
        return sorted(set(out))

    # algebra
    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.parts + other.parts)

    __or__ = union

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for a in self.parts:
            for b in other.parts:
                if a.lo > b.lo:
                    lo, lc = a.lo, a.lo_closed
                elif b.lo > a.lo:
                    lo, lc = b.lo, b.lo_closed
                else:
                    lo, lc = a.lo, a.lo_closed and b.lo_closed
                if a.hi < b.hi:
                    hi, hc = a.hi, a.hi_closed
                elif b.hi < a.hi:
                    hi, hc = b.hi, b.hi_closed
                else:
                    hi, hc = a.hi, a.hi_closed and b.hi_closed
                iv = make_interval(lo, hi, lc, hc)
                if iv is not None:
                    out.append(iv)
        return IntervalSet(tuple(out))

    __and__ = intersect

    def complement(self) -> "IntervalSet":
        out = []
        lo, lc = NEG_INF, False
        for p in self.parts:
            iv = make_interval(lo, p.lo, lc, not p.lo_closed)
            if iv is not None:
                out.append(iv)
            lo, lc = p.hi, not p.hi_closed
        iv = make_interval(lo, INF, lc, False)
        if iv is not None:
            out.append(iv)
        return IntervalSet(tuple(out))

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        return self.intersect(other.complement())

    __sub__ = difference

    def affine(self, lam: float, c: float = 0.0) -> "IntervalSet":
        return iset_affine(self, lam, c)

    def minkowski(self, other: "IntervalSet") -> "IntervalSet":
        return iset_minkowski(self, other)

    def inflate(self, tol: float) -> "IntervalSet":
        if tol <= 0.0:
            return self
        return IntervalSet(tuple(Interval(p.lo - tol, p.hi + tol) for p in self.parts))

    def issubset(self, other: "IntervalSet", tol: float = 0.0) -> bool:
        return self.difference(other.inflate(tol)).is_empty

    def clip(self, lo: float, hi: float) -> "IntervalSet":
        return self.intersect(IntervalSet.closed(lo, hi))

    def distance(self, x: float) -> float:
        if not self.parts:
            return INF
        best = INF
        for p in self.parts:
            if x < p.lo:
                d = p.lo - x
            elif x > p.hi:
                d = x - p.hi
            else:
                d = 0.0
            best = min(best, d)
        return best

    def nearest(self, x: float) -> float:
        """Closest point of the closure; ties resolve to the smaller point."""
        if not self.parts:
            raise ValueError("empty set has no nearest point")
        best, best_d = None, INF
        for p in self.parts:
            y = min(max(x, p.lo), p.hi)
            d = abs(y - x)
            if d < best_d:
                best, best_d = y, d
        return best

    def __str__(self):
        if not self.parts:
            return "{}"
        return " | ".join(str(p) for p in self.parts)

    def __repr__(self):
        return f"IntervalSet({str(self)!r})"

    def to_json(self):
        return [[fmt(p.lo), fmt(p.hi), p.lo_closed, p.hi_closed] for p in self.parts]

    @classmethod
    def from_json(cls, data):
        from .extreal import ext
        return cls.of(*[(ext(lo), ext(hi), bool(lc), bool(hc)) for lo, hi, lc, hc in data])


def iset_union(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    return a.union(b)


def iset_intersect(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    return a.intersect(b)


def iset_affine(a: IntervalSet, lam: float, c: float = 0.0) -> IntervalSet:
    """Image ``{lam * s + c : s in a}``; ``lam`` must be finite and nonzero."""
    lam = float(lam)
    if lam == 0.0 or not math.isfinite(lam):
        raise ValueError("affine scale must be finite and nonzero")
    if not math.isfinite(c):
        raise ValueError("affine shift must be finite")
    out = []
    for p in a.parts:
        lo, hi = lam * p.lo + c, lam * p.hi + c
        if lam > 0:
            out.append(make_interval(lo, hi, p.lo_closed, p.hi_closed))
        else:
            out.append(make_interval(hi, lo, p.hi_closed, p.lo_closed))
    return IntervalSet(tuple(iv for iv in out if iv is not None))


def iset_minkowski(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    out = []
    for p in a.parts:
        for q in b.parts:
            lo = ext_add(p.lo, q.lo) if not (p.lo == NEG_INF or q.lo == NEG_INF) else NEG_INF
            hi = ext_add(p.hi, q.hi)
            iv = make_interval(lo, hi, p.lo_closed and q.lo_closed, p.hi_closed and q.hi_closed)
            if iv is not None:
                out.append(iv)
    return IntervalSet(tuple(out))


def _sup_distance(a: IntervalSet, b: IntervalSet) -> float:
    """``sup_{x in a} dist(x, b)`` for bounded closed sets."""
    gaps = []
    for left, right in zip(b.parts, b.parts[1:]):
        gaps.append(0.5 * (left.hi + right.lo))
    worst = 0.0
    for p in a.parts:
        cands = [p.lo, p.hi] + [g for g in gaps if p.lo <= g <= p.hi]
        for x in cands:
            worst = max(worst, b.distance(x))
    return worst


def hausdorff(a: IntervalSet, b: IntervalSet, window: float | None = None) -> float:
    """Hausdorff distance between the closures of ``a`` and ``b``.

    Unbounded parts are clipped to ``[-window, window]``; by default the
    window reaches one unit past every finite endpoint of either set.
    """
    if window is None:
        ends = [abs(e) for e in a.finite_endpoints() + b.finite_endpoints()]
        window = (max(ends) if ends else 0.0) + 1.0
    ca = a.closure().clip(-window, window)
    cb = b.closure().clip(-window, window)
    if ca.is_empty and cb.is_empty:
        return 0.0
    if ca.is_empty or cb.is_empty:
        return INF
    return max(_sup_distance(ca, cb), _sup_distance(cb, ca))


def iset_outer_limit(seq: Sequence, scales: Sequence[float] | None = None,
                     tol_lim: float = 1e-7) -> IntervalSet:
    """Numerical outer limit of a sequence of interval sets.

    ``seq`` holds ``(k, A_k)`` pairs with strictly increasing ``k``. Each
    endpoint sequence is extrapolated linearly in the scale ``h_k``
    (``1/k`` unless ``scales`` is given) using the last two entries; with a
    third entry the extrapolation is repeated one step earlier and the two
    values must agree within ``tol_lim``. Failing sequences raise
    :class:`InconclusiveLimit` carrying the examined data.
    """
    seq = list(seq)
    if not seq:
        raise ValueError("outer limit of an empty sequence")
    ks = [k for k, _ in seq]
    if any(k2 <= k1 for k1, k2 in zip(ks, ks[1:])):
        raise ValueError("sequence indices must be strictly increasing")
    if scales is None:
        hs = [1.0 / k for k in ks]
    else:
        hs = [float(h) for h in scales]
        if len(hs) != len(seq):
            raise ValueError("one scale per sequence entry is required")
    tail = seq[-3:]
    htail = hs[-3:]
    raw = [(k, str(s)) for k, s in tail]
    sets = [s for _, s in tail]
    if all(s == sets[-1] for s in sets):
        return sets[-1].closure()
    if any(s.is_empty for s in sets):
        raise InconclusiveLimit("emptiness changes along the tail", raw)
    counts = {len(s) for s in sets}
    if len(counts) != 1:
        raise InconclusiveLimit("part counts differ along the tail", raw)

    def extrapolate(v, h):
        d = v[-1] - v[-2]
        step = h[-2] - h[-1]
        if step <= 0:
            raise InconclusiveLimit("scales must decrease", raw)
        return v[-1] + d * h[-1] / step

    def limit_of(values):
        if all(v == values[-1] for v in values):
            return values[-1]
        if any(not math.isfinite(v) for v in values):
            raise InconclusiveLimit("endpoint alternates between finite and infinite", raw)
        lim = extrapolate(values, htail)
        if len(values) == 3:
            prev = extrapolate(values[:2], htail[:2])
            if abs(lim - prev) > tol_lim * max(1.0, abs(lim)):
                raise InconclusiveLimit(
                    f"endpoint sequence {values} does not settle (gap {abs(lim - prev):.3g})", raw)
        # drop extrapolation round-off
        return float(f"{lim:.12g}")

    parts = []
    for idx in range(len(sets[0])):
        lo = limit_of([s.parts[idx].lo for s in sets])
        hi = limit_of([s.parts[idx].hi for s in sets])
        if lo > hi:
            if lo - hi > tol_lim * max(1.0, abs(lo)):
                raise InconclusiveLimit("extrapolated endpoints cross", raw)
            lo = hi = 0.5 * (lo + hi)
        parts.append(Interval(lo, hi, True, True))
    return IntervalSet(tuple(parts))


_LITERAL = re.compile(r"^\s*([\[\(])(.*),(.*)([\]\)])\s*$", re.S)


def _constant(text: str, whole: str) -> float:
    from .expr import parse_constant
    return parse_constant(text.strip(), context=whole)


def parse_interval_term(text: str, whole: str | None = None) -> IntervalSet | None:
    """Parse one literal term; ``None`` if ``text`` is not literal syntax."""
    whole = whole if whole is not None else text
    t = text.strip()
    if t in ("R", "ℝ", "reals"):
        return IntervalSet.real_line()
    if t in ("{}", "empty", "∅"):
        return IntervalSet.empty()
    if t.startswith("{") and t.endswith("}"):
        body = t[1:-1].strip()
        if not body:
            return IntervalSet.empty()
        pts = [_constant(s, whole) for s in body.split(",")]
        for p in pts:
            if not math.isfinite(p):
                raise DSLSyntaxError("point sets need finite members", whole)
        return IntervalSet(tuple(Interval(p, p) for p in pts))
    m = _LITERAL.match(t)
    if not m:
        return None
    left, a, b, right = m.groups()
    lo, hi = _constant(a, whole), _constant(b, whole)
    if lo > hi:
        raise DSLSyntaxError(f"interval endpoints out of order ({fmt(lo)} > {fmt(hi)})", whole)
    if lo == hi and not (left == "[" and right == "]"):
        raise DSLSyntaxError("degenerate interval must be written closed", whole)
    if (lo == NEG_INF and left == "[") or (hi == INF and right == "]"):
        raise DSLSyntaxError("infinite endpoints must be open", whole)
    return IntervalSet((Interval(lo, hi, left == "[", right == "]"),))


def split_top_level(text: str, sep: str) -> list:
    """Split ``text`` on ``sep`` outside brackets, braces and parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == sep and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return out


def parse_intervalset(text: str) -> IntervalSet:
    """Parse ``"[0, inf) | {1}"`` style text into an :class:`IntervalSet`."""
    if not isinstance(text, str) or not text.strip():
        raise DSLSyntaxError("empty interval text", text)
    acc = IntervalSet.empty()
    for term in split_top_level(text, "|"):
        part = parse_interval_term(term, text)
        if part is None:
            raise DSLSyntaxError(f"cannot read interval term {term.strip()!r}", text)
        acc = acc.union(part)
    return acc
