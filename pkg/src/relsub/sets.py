"""Closed sets in R^n (n <= 3): membership, projection, tangent cones.

Variants are 1-D interval unions, segments, boxes, H-polytopes and finite
unions of the convex variants. The duality mapping of the Euclidean
setting is the identity, so tangent cones double as their own duality
images.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import DomainError
from .extreal import INF, NEG_INF, fmt
from .intervals import Interval, IntervalSet
from .verdicts import Trit, Verdict

MAX_DIM = 3
_ACTIVE_TOL = 1e-10


def _vec(x, dim=None):
    v = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"expected a point of dimension {dim}, got {v.shape[0]}")
    return v


def duality_map(v):
    """Duality mapping of Euclidean space: the identity."""
    if np.isscalar(v):
        return float(v)
    return np.array(v, dtype=float, copy=True)


def project_polyhedron(A, b, x, tol=1e-10):
    """Euclidean projection of ``x`` onto ``{y : A y <= b}``.

    Active-set enumeration: every subset of at most ``n`` rows is tried as
    the active set, the KKT system is solved, and the feasible candidate
    with nonnegative multipliers closest to ``x`` is returned.
    """
    A = np.asarray(A, dtype=float).reshape(-1, len(x))
    b = np.asarray(b, dtype=float).ravel()
    x = np.asarray(x, dtype=float)
    scale = 1.0 + float(np.max(np.abs(x))) + (float(np.max(np.abs(b))) if b.size else 0.0)
    if A.shape[0] == 0 or np.all(A @ x <= b + tol * scale):
        return x.copy()
    n, m = len(x), A.shape[0]
    best, best_d = None, INF
    for size in range(1, min(n, m) + 1):
        for rows in itertools.combinations(range(m), size):
            AS = A[list(rows)]
            G = AS @ AS.T
            if np.linalg.matrix_rank(G) < size:
                continue
            lam = np.linalg.solve(G, AS @ x - b[list(rows)])
            if np.any(lam < -tol * scale):
                continue
            y = x - AS.T @ lam
            if np.all(A @ y <= b + tol * scale):
                d = float(np.linalg.norm(y - x))
                if d < best_d - 1e-15:
                    best, best_d = y, d
    if best is None:  # numerically degenerate; fall back to a solver
        from scipy.optimize import minimize
        cons = {"type": "ineq", "fun": lambda y: b - A @ y, "jac": lambda y: -A}
        res = minimize(lambda y: 0.5 * np.sum((y - x) ** 2), x, jac=lambda y: y - x,
                       constraints=[cons], method="SLSQP", options={"ftol": 1e-14, "maxiter": 500})
        best = res.x
    return best


def _orth_complement(u):
    """Rows spanning the orthogonal complement of ``u``."""
    n = len(u)
    if n == 1:
        return np.zeros((0, 1))
    q, _ = np.linalg.qr(np.column_stack([u] + [np.eye(n)[i] for i in range(n)]))
    return q[:, 1:n].T


@dataclass(frozen=True, eq=False)
class ConeRep:
    """Finite union of polyhedral cones ``{v : A v <= 0}``."""

    dim: int
    members: tuple

    def contains(self, v, tol: float = 1e-9) -> bool:
        return self.distance(v) <= tol * max(1.0, float(np.linalg.norm(_vec(v))))

    def project(self, v):
        v = _vec(v, self.dim)
        best, best_d = None, INF
        for A in self.members:
            y = project_polyhedron(A, np.zeros(A.shape[0]), v)
            d = float(np.linalg.norm(y - v))
            if d < best_d:
                best, best_d = y, d
        return best

    def distance(self, v) -> float:
        v = _vec(v, self.dim)
        return float(np.linalg.norm(self.project(v) - v))

    def to_intervalset(self) -> IntervalSet:
        if self.dim != 1:
            raise ValueError("only 1-D cones convert to interval sets")
        acc = IntervalSet.empty()
        for A in self.members:
            lo, hi = NEG_INF, INF
            for a in A[:, 0]:
                if a > 0:
                    hi = min(hi, 0.0)
                elif a < 0:
                    lo = max(lo, 0.0)
            acc = acc.union(IntervalSet.of((lo, hi)))
        return acc

    def __eq__(self, other):
        if not isinstance(other, ConeRep) or other.dim != self.dim:
            return NotImplemented
        if self.dim == 1:
            return self.to_intervalset() == other.to_intervalset()
        return self is other

    __hash__ = object.__hash__

    def __str__(self):
        if self.dim == 1:
            return str(self.to_intervalset())
        return " | ".join("{v: " + np.array2string(A, precision=6) + " v <= 0}" for A in self.members)

    @classmethod
    def from_intervalset(cls, iset: IntervalSet) -> "ConeRep":
        rows = {"R": np.zeros((0, 1)), "+": np.array([[-1.0]]), "-": np.array([[1.0]]),
                "0": np.array([[1.0], [-1.0]])}
        members = []
        for p in iset.parts:
            if p.lo == NEG_INF and p.hi == INF:
                members.append(rows["R"])
            elif p.lo == 0.0 and p.hi == INF:
                members.append(rows["+"])
            elif p.lo == NEG_INF and p.hi == 0.0:
                members.append(rows["-"])
            elif p.lo == 0.0 and p.hi == 0.0:
                members.append(rows["0"])
            else:
                raise ValueError(f"{iset} is not a 1-D cone")
        return cls(1, tuple(members))


class ClosedSet:
    """Common interface; concrete variants below."""

    dim: int = 1
    is_convex: bool = True

    def contains(self, x, tol: float = 1e-12) -> bool:
        return self.distance(x) <= tol

    def distance(self, x) -> float:
        x = _vec(x, self.dim)
        return float(np.linalg.norm(self.nearest(x) - x))

    def nearest(self, x):
        return self.project(x)

    def project(self, x):  # pragma: no cover - abstract
        raise NotImplementedError

    def _require_member(self, xbar, tol=1e-9):
        xbar = _vec(xbar, self.dim)
        if not self.contains(xbar, tol):
            raise DomainError(f"point {xbar.tolist()} is not in {self.describe()}")
        return xbar

    def tangent_cone(self, xbar) -> ConeRep:  # pragma: no cover - abstract
        raise NotImplementedError

    def as_intervalset(self) -> IntervalSet:
        raise ValueError(f"{type(self).__name__} of dimension {self.dim} is not 1-D")

    def sample_ball(self, center, r, density, phase=0.0):  # pragma: no cover - abstract
        raise NotImplementedError

    def describe(self) -> str:  # pragma: no cover - abstract
        raise NotImplementedError

    def __str__(self):
        return self.describe()


def _grid_in_interval(lo, hi, density, phase=0.0):
    """Grid on ``[lo, hi]`` with both endpoints; interior nodes shifted by ``phase`` cells."""
    if hi <= lo:
        return np.array([lo])
    t = np.linspace(0.0, 1.0, density)
    if phase and density > 2:
        t[1:-1] = t[1:-1] + phase / (density - 1)
    return lo + (hi - lo) * t


@dataclass(frozen=True, eq=False)
class Interval1D(ClosedSet):
    """Finite union of closed intervals on the line."""

    parts: IntervalSet

    def __post_init__(self):
        if self.parts.is_empty:
            raise ValueError("closed sets must be nonempty")
        if not self.parts.is_closed:
            raise ValueError(f"interval parts must be closed, got {self.parts}")

    dim = 1

    @property
    def is_convex(self):
        return len(self.parts) == 1

    def __eq__(self, other):
        return isinstance(other, Interval1D) and other.parts == self.parts

    def __hash__(self):
        return hash(self.parts)

    def project(self, x):
        return np.array([self.parts.nearest(float(_vec(x, 1)[0]))])

    def distance(self, x):
        return self.parts.distance(float(_vec(x, 1)[0]))

    def as_intervalset(self):
        return self.parts

    def side_access(self, xbar: float):
        """``(left, right)``: whether the set contains a one-sided germ at ``xbar``."""
        left = any(p.lo < xbar <= p.hi for p in self.parts)
        right = any(p.lo <= xbar < p.hi for p in self.parts)
        return left, right

    def tangent_cone(self, xbar):
        x = float(self._require_member(xbar)[0])
        x = self.parts.nearest(x)
        left, right = self.side_access(x)
        lo = NEG_INF if left else 0.0
        hi = INF if right else 0.0
        return ConeRep.from_intervalset(IntervalSet.of((lo, hi)))

    def sample_ball(self, center, r, density, phase=0.0):
        c = float(_vec(center, 1)[0])
        window = self.parts.clip(c - r, c + r)
        pts = []
        for p in window.parts:
            pts.append(_grid_in_interval(p.lo, p.hi, density, phase))
        if self.parts.contains(c):
            pts.append(np.array([c]))
        if not pts:
            return np.zeros((0, 1))
        return np.unique(np.concatenate(pts))[:, None]

    def describe(self):
        return str(self.parts)


@dataclass(frozen=True, eq=False)
class Segment(ClosedSet):
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a, b = _vec(self.a), _vec(self.b)
        if a.shape != b.shape:
            raise ValueError("segment endpoints differ in dimension")
        if a.shape[0] > MAX_DIM:
            raise ValueError(f"dimension capped at {MAX_DIM}")
        if np.array_equal(a, b):
            raise ValueError("segment endpoints must differ")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def dim(self):
        return self.a.shape[0]

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.b - self.a))

    @property
    def direction(self):
        return (self.b - self.a) / self.length

    def __eq__(self, other):
        return isinstance(other, Segment) and np.array_equal(self.a, other.a) \
            and np.array_equal(self.b, other.b)

    def __hash__(self):
        return hash((tuple(self.a), tuple(self.b)))

    def param(self, x) -> float:
        """Arclength coordinate of the projection of ``x``."""
        x = _vec(x, self.dim)
        s = float(np.dot(x - self.a, self.direction))
        return min(max(s, 0.0), self.length)

    def project(self, x):
        return self.a + self.param(x) * self.direction

    def as_intervalset(self):
        if self.dim != 1:
            return super().as_intervalset()
        lo, hi = sorted((float(self.a[0]), float(self.b[0])))
        return IntervalSet.closed(lo, hi)

    def tangent_cone(self, xbar):
        x = self._require_member(xbar)
        u = self.direction
        W = _orth_complement(u)
        rows = [W, -W]
        s = self.param(x)
        scale = max(1.0, self.length)
        if s <= _ACTIVE_TOL * scale:
            rows.append(-u[None, :])
        if s >= self.length - _ACTIVE_TOL * scale:
            rows.append(u[None, :])
        A = np.vstack([r for r in rows if r.size]) if any(r.size for r in rows) \
            else np.zeros((0, self.dim))
        return ConeRep(self.dim, (A,))

    def sample_ball(self, center, r, density, phase=0.0):
        c = _vec(center, self.dim)
        s0 = float(np.dot(c - self.a, self.direction))
        off = float(np.linalg.norm(c - (self.a + s0 * self.direction)))
        if off > r:
            return np.zeros((0, self.dim))
        half = math.sqrt(max(r * r - off * off, 0.0))
        lo, hi = max(0.0, s0 - half), min(self.length, s0 + half)
        if lo > hi:
            return np.zeros((0, self.dim))
        ss = _grid_in_interval(lo, hi, density, phase)
        if 0.0 <= s0 <= self.length and off == 0.0:
            ss = np.unique(np.append(ss, s0))
        return self.a[None, :] + ss[:, None] * self.direction[None, :]

    def describe(self):
        return f"segment({self.a.tolist()}, {self.b.tolist()})"


@dataclass(frozen=True, eq=False)
class Box(ClosedSet):
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo, hi = _vec(self.lo), _vec(self.hi)
        if lo.shape != hi.shape:
            raise ValueError("box bounds differ in dimension")
        if lo.shape[0] > MAX_DIM:
            raise ValueError(f"dimension capped at {MAX_DIM}")
        if np.any(lo > hi):
            raise ValueError("box needs lo <= hi componentwise")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("box bounds must not be NaN")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.lo.shape[0]

    def __eq__(self, other):
        return isinstance(other, Box) and np.array_equal(self.lo, other.lo) \
            and np.array_equal(self.hi, other.hi)

    def __hash__(self):
        return hash((tuple(self.lo), tuple(self.hi)))

    def project(self, x):
        return np.clip(_vec(x, self.dim), self.lo, self.hi)

    def as_intervalset(self):
        if self.dim != 1:
            return super().as_intervalset()
        return IntervalSet.of((self.lo[0], self.hi[0], True, True))

    def tangent_cone(self, xbar):
        x = self._require_member(xbar)
        rows = []
        for i in range(self.dim):
            e = np.eye(self.dim)[i]
            tol = _ACTIVE_TOL * max(1.0, abs(x[i]))
            if x[i] <= self.lo[i] + tol:
                rows.append(-e)
            if x[i] >= self.hi[i] - tol:
                rows.append(e)
        A = np.array(rows) if rows else np.zeros((0, self.dim))
        return ConeRep(self.dim, (A,))

    def sample_ball(self, center, r, density, phase=0.0):
        return _sample_convex(self, center, r, density, phase)

    def describe(self):
        return f"box({self.lo.tolist()}, {self.hi.tolist()})"


@dataclass(frozen=True, eq=False)
class PolytopeH(ClosedSet):
    """``{x : A x <= b}``; unbounded polyhedra must set ``unbounded=True``."""

    A: np.ndarray
    b: np.ndarray
    unbounded: bool = False

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = _vec(self.b)
        if A.shape[0] != b.shape[0]:
            raise ValueError("one offset per row is required")
        if A.shape[1] > MAX_DIM:
            raise ValueError(f"dimension capped at {MAX_DIM}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        n = A.shape[1]
        res = linprog(np.zeros(n), A_ub=A, b_ub=b, bounds=[(None, None)] * n, method="highs")
        if res.status == 2:
            raise ValueError("polytope is empty")
        if not self.unbounded:
            for i in range(n):
                for sgn in (1.0, -1.0):
                    c = np.zeros(n)
                    c[i] = -sgn
                    r = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * n, method="highs")
                    if r.status == 3:
                        raise ValueError("polytope is unbounded; set unbounded = true")

    @property
    def dim(self):
        return self.A.shape[1]

    def __eq__(self, other):
        return isinstance(other, PolytopeH) and np.array_equal(self.A, other.A) \
            and np.array_equal(self.b, other.b) and self.unbounded == other.unbounded

    def __hash__(self):
        return hash((self.A.tobytes(), self.b.tobytes(), self.unbounded))

    def project(self, x):
        return project_polyhedron(self.A, self.b, _vec(x, self.dim))

    def as_intervalset(self):
        if self.dim != 1:
            return super().as_intervalset()
        lo, hi = NEG_INF, INF
        for a, c in zip(self.A[:, 0], self.b):
            if a > 0:
                hi = min(hi, c / a)
            elif a < 0:
                lo = max(lo, c / a)
        return IntervalSet.of((lo, hi, True, True))

    def tangent_cone(self, xbar):
        x = self._require_member(xbar)
        slack = self.b - self.A @ x
        scale = 1.0 + np.abs(self.b) + np.abs(self.A) @ np.abs(x)
        active = slack <= 1e-9 * scale
        return ConeRep(self.dim, (self.A[active].copy(),))

    def sample_ball(self, center, r, density, phase=0.0):
        return _sample_convex(self, center, r, density, phase)

    def describe(self):
        rows = "; ".join(f"{np.round(a, 12).tolist()}.x <= {fmt(c)}" for a, c in zip(self.A, self.b))
        return f"polytope({rows})"


def _sample_convex(S, center, r, density, phase=0.0):
    """Grid of the ball's bounding cube projected onto ``S`` and kept inside the ball."""
    c = _vec(center, S.dim)
    n = S.dim
    per = max(8, min(density, int(round(4096 ** (1.0 / n)))))
    axes = [_grid_in_interval(c[i] - r, c[i] + r, per, phase) for i in range(n)]
    grid = np.array(np.meshgrid(*axes, indexing="ij")).reshape(n, -1).T
    proj = np.array([S.project(g) for g in grid])
    keep = np.linalg.norm(proj - c[None, :], axis=1) <= r * (1 + 1e-12)
    pts = proj[keep]
    if S.contains(c, 1e-12):
        pts = np.vstack([pts, c[None, :]])
    if pts.shape[0] == 0:
        return np.zeros((0, n))
    return np.unique(np.round(pts, 15), axis=0)


@dataclass(frozen=True, eq=False)
class FiniteUnion(ClosedSet):
    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("union needs at least one member")
        dims = {m.dim for m in members}
        if len(dims) != 1:
            raise ValueError("union members must share a dimension")
        for m in members:
            if isinstance(m, FiniteUnion) or not m.is_convex:
                raise ValueError("union members must be convex variants")
        object.__setattr__(self, "members", members)

    is_convex = False

    @property
    def dim(self):
        return self.members[0].dim

    def __eq__(self, other):
        return isinstance(other, FiniteUnion) and self.members == other.members

    def __hash__(self):
        return hash(self.members)

    def nearest(self, x):
        x = _vec(x, self.dim)
        best, best_d = None, INF
        for m in self.members:
            y = m.project(x)
            d = float(np.linalg.norm(y - x))
            if d < best_d:
                best, best_d = y, d
        return best

    def project(self, x):
        raise ValueError("projection onto a finite union is not single-valued; use nearest()")

    def distance(self, x):
        x = _vec(x, self.dim)
        return min(m.distance(x) for m in self.members)

    def as_intervalset(self):
        acc = IntervalSet.empty()
        for m in self.members:
            acc = acc.union(m.as_intervalset())
        return acc

    def tangent_cone(self, xbar):
        x = self._require_member(xbar)
        members = []
        for m in self.members:
            if m.contains(x, 1e-9):
                members.extend(m.tangent_cone(x).members)
        return ConeRep(self.dim, tuple(members))

    def sample_ball(self, center, r, density, phase=0.0):
        chunks = [m.sample_ball(center, r, density, phase) for m in self.members]
        chunks = [c for c in chunks if c.shape[0]]
        if not chunks:
            return np.zeros((0, self.dim))
        return np.unique(np.vstack(chunks), axis=0)

    def describe(self):
        return " | ".join(m.describe() for m in self.members)


def interval_set(text_or_iset) -> Interval1D:
    """Convenience constructor: ``interval_set("[0, inf)")``."""
    if isinstance(text_or_iset, IntervalSet):
        return Interval1D(text_or_iset)
    from .intervals import parse_intervalset
    return Interval1D(parse_intervalset(text_or_iset))


def real_line() -> Interval1D:
    return Interval1D(IntervalSet.real_line())


def contains(S: ClosedSet, x, tol: float = 0.0) -> bool:
    return S.contains(x, tol)


def project(S: ClosedSet, x):
    if not S.is_convex:
        raise ValueError("projection requires a convex set")
    return S.project(x)


def tangent_cone(S: ClosedSet, xbar) -> ConeRep:
    return S.tangent_cone(xbar)


def eps_normal_contains(S: ClosedSet, xbar, xstar, eps: float, tol: float = 1e-9) -> Trit:
    """Membership of ``xstar`` in the epsilon-normal set of a convex ``S`` at ``xbar``.

    For convex sets the test ``<x*, x - xbar> <= eps |x - xbar|`` over all
    of ``S`` reduces to the norm of the projection of ``x*`` onto the
    tangent cone, so the verdict is exact for every variant including
    unbounded polyhedra.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if not S.is_convex:
        raise ValueError("epsilon-normal test needs a convex set")
    xs = _vec(xstar, S.dim)
    cone = S.tangent_cone(xbar)
    margin = float(np.linalg.norm(cone.project(xs))) - eps
    return Trit(Verdict.IN if margin <= tol else Verdict.OUT, margin)


def as_interval_set(S) -> IntervalSet:
    """1-D view of a closed set or interval set."""
    if isinstance(S, IntervalSet):
        return S
    return S.as_intervalset()


def as_closed_set(S) -> ClosedSet:
    if isinstance(S, ClosedSet):
        return S
    if isinstance(S, IntervalSet):
        return Interval1D(S)
    if isinstance(S, str):
        return interval_set(S)
    raise TypeError(f"cannot use {type(S).__name__} as a closed set")
