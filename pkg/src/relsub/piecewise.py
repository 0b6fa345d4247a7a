"""Piecewise extended-real functions built from guarded expressions."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EvaluationError, SplitRequired, ValidationError
from .expr import (Const, Expr, Var, abs_arguments, add, denominators, derivative, evaluate,
                   interior_sign, max_var, mul, probe_points, sign_changes, substitute, to_str,
                   try_eval)
from .extreal import INF, ext_add, ext_mul, fmt
from .guards import Everything, Intersection, Region, SetRegion, guard_contains_many, guard_str
from .intervals import Interval, IntervalSet


@dataclass(frozen=True)
class Piece:
    guard: object
    expr: Expr
    source: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SmoothPiece:
    """A 1-D piece on one interval on which every ``abs`` has a fixed sign."""

    interval: Interval
    expr: Expr
    deriv: Expr | None
    index: int


@dataclass(frozen=True)
class PiecewiseFunc:
    """``f(x) = expr_i(x)`` on ``guard_i``, ``default`` elsewhere.

    Guards must be pairwise disjoint and must keep every division away
    from zero; both are checked on construction.
    """

    pieces: tuple
    default: float = INF
    dim: int = 1
    name: str = field(default="f", compare=False)

    def __post_init__(self):
        pieces = tuple(p if isinstance(p, Piece) else Piece(*p) for p in self.pieces)
        object.__setattr__(self, "pieces", pieces)
        if math.isnan(self.default):
            raise ValidationError(f"{self.name}: default value must not be NaN")
        for i, p in enumerate(pieces):
            if max_var(p.expr) >= self.dim:
                raise ValidationError(f"{self.name}: piece {i} uses a variable beyond dimension {self.dim}")
            if self.dim == 1 and not isinstance(p.guard, IntervalSet):
                raise ValidationError(f"{self.name}: 1-D guards must be interval sets")
            if self.dim > 1 and not isinstance(p.guard, Region):
                raise ValidationError(f"{self.name}: guards in dimension {self.dim} must be regions")
        self._check_disjoint()
        self._check_poles()

    # -- validation -----------------------------------------------------------
    def _check_disjoint(self):
        if self.dim == 1:
            for i in range(len(self.pieces)):
                for j in range(i + 1, len(self.pieces)):
                    common = self.pieces[i].guard.intersect(self.pieces[j].guard)
                    if not common.is_empty:
                        raise ValidationError(
                            f"{self.name}: guards of pieces {i} and {j} overlap on {common}")
            return
        X = _validation_cloud(self.dim)
        hits = np.zeros(X.shape[0], dtype=int)
        for p in self.pieces:
            hits += p.guard.contains_many(X)
        if np.any(hits > 1):
            bad = X[np.argmax(hits > 1)]
            raise ValidationError(f"{self.name}: guards overlap near {bad.tolist()}")

    def _check_poles(self):
        for i, p in enumerate(self.pieces):
            for den in denominators(p.expr):
                if self.dim == 1:
                    for part in p.guard.parts:
                        _check_pole_1d(self, i, den, part)
                else:
                    X = _validation_cloud(self.dim)
                    X = X[p.guard.contains_many(X)]
                    if X.shape[0] and np.any(evaluate(den, X) == 0.0):
                        raise ValidationError(f"{self.name}: piece {i} divides by zero inside its guard")

    # -- evaluation -----------------------------------------------------------
    def eval_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None] if self.dim == 1 else X[None, :]
        if X.shape[1] != self.dim:
            raise ValueError(f"{self.name}: expected points of dimension {self.dim}")
        out = np.full(X.shape[0], self.default, dtype=float)
        for i, p in enumerate(self.pieces):
            mask = guard_contains_many(p.guard, X)
            if mask.any():
                try:
                    out[mask] = evaluate(p.expr, X[mask])
                except EvaluationError as exc:
                    raise EvaluationError(f"{self.name}, piece {i} ({to_str(p.expr)}): {exc}") from None
        return out

    def __call__(self, *x) -> float:
        if len(x) == 1:
            x = np.atleast_1d(np.asarray(x[0], dtype=float))
        return float(self.eval_many(np.asarray(x, dtype=float).reshape(1, self.dim))[0])

    def piece_index(self, x) -> int | None:
        X = np.asarray(x, dtype=float).reshape(1, self.dim)
        for i, p in enumerate(self.pieces):
            if guard_contains_many(p.guard, X)[0]:
                return i
        return None

    # -- structure (1-D) ------------------------------------------------------
    def _require_1d(self, what):
        if self.dim != 1:
            raise ValueError(f"{what} needs a 1-D function")

    def default_region(self) -> IntervalSet:
        self._require_1d("default_region")
        covered = IntervalSet.empty()
        for p in self.pieces:
            covered = covered.union(p.guard)
        return covered.complement()

    def breakpoints(self) -> list:
        """Finite guard endpoints and ``abs`` switching points."""
        self._require_1d("breakpoints")
        pts = set()
        for p in self.pieces:
            pts.update(p.guard.finite_endpoints())
        for sp in self.smooth_pieces():
            for v in (sp.interval.lo, sp.interval.hi):
                if math.isfinite(v):
                    pts.add(v)
        return sorted(pts)

    def smooth_pieces(self) -> tuple:
        return _smooth_pieces(self)

    def piece_derivative(self, index: int) -> Expr:
        """Derivative of piece ``index`` valid on the interior of its guard."""
        self._require_1d("piece_derivative")
        p = self.pieces[index]
        parts = [iv for iv in p.guard.parts if iv.lo < iv.hi]
        if not parts:
            raise ValueError(f"{self.name}: piece {index} has an empty interior")
        found = None
        for iv in parts:
            for arg in abs_arguments(p.expr):
                zs = sign_changes(arg, iv.lo, iv.hi)
                if zs:
                    raise SplitRequired(zs[0], index)
            d = derivative(p.expr, 0, lambda a, iv=iv: interior_sign(a, iv.lo, iv.hi))
            if found is not None and d != found:
                raise SplitRequired(iv.lo, index)
            found = d
        return found

    # -- transformations ------------------------------------------------------
    def restrict(self, omega) -> "PiecewiseFunc":
        """``f`` on ``omega`` and ``+inf`` outside."""
        if omega.dim != self.dim:
            raise ValueError("dimension mismatch between function and set")
        if self.dim == 1:
            dom = omega.as_intervalset()
            pieces = [Piece(p.guard.intersect(dom), p.expr, p.source) for p in self.pieces]
            if self.default != INF:
                rest = self.default_region().intersect(dom)
                pieces.append(Piece(rest, Const(self.default)))
            pieces = [p for p in pieces if not p.guard.is_empty]
        else:
            region = SetRegion(omega)
            pieces = [Piece(Intersection((p.guard, region)), p.expr, p.source) for p in self.pieces]
            if self.default != INF:
                raise ValueError("restricting an n-D function with a non-infinite default is unsupported")
        return PiecewiseFunc(tuple(pieces), INF, self.dim, f"{self.name}_Omega")

    def scale(self, lam: float) -> "PiecewiseFunc":
        pieces = tuple(Piece(p.guard, mul(Const(float(lam)), p.expr)) for p in self.pieces)
        return PiecewiseFunc(pieces, ext_mul(float(lam), self.default), self.dim, f"{fmt(lam)}*{self.name}")

    def shift(self, c: float) -> "PiecewiseFunc":
        pieces = tuple(Piece(p.guard, add(p.expr, Const(float(c)))) for p in self.pieces)
        return PiecewiseFunc(pieces, ext_add(self.default, float(c)), self.dim, f"{self.name}+{fmt(c)}")

    def __add__(self, other: "PiecewiseFunc") -> "PiecewiseFunc":
        return add_functions(self, other)

    def describe(self) -> str:
        rows = [f"{to_str(p.expr)} on {guard_str(p.guard)}" for p in self.pieces]
        rows.append(f"{fmt(self.default)} elsewhere")
        return "; ".join(rows)


def _validation_cloud(dim: int) -> np.ndarray:
    rng = np.random.default_rng(12345)
    axis = np.concatenate([np.linspace(-4, 4, 33), [-1e-9, 1e-9]])
    grid = np.array(np.meshgrid(*([axis] * dim), indexing="ij")).reshape(dim, -1).T
    return np.vstack([grid, rng.normal(scale=3.0, size=(2000, dim))])


def _check_pole_1d(f, i, den, part: Interval):
    closed = [v for v, c in ((part.lo, part.lo_closed), (part.hi, part.hi_closed)) if c and math.isfinite(v)]
    for v in closed:
        if try_eval(den, v) == 0.0:
            raise ValidationError(f"{f.name}: piece {i} divides by zero at {fmt(v)}")
    if part.lo == part.hi:
        return
    xs = probe_points(part.lo, part.hi, 401)
    vals = np.array([try_eval(den, x) for x in xs])
    if np.any(vals == 0.0) or sign_changes(den, part.lo, part.hi):
        raise ValidationError(f"{f.name}: piece {i} divides by zero inside {part}")


@functools.lru_cache(maxsize=512)
def _smooth_pieces(f: PiecewiseFunc) -> tuple:
    f._require_1d("smooth_pieces")
    out = []
    entries = [(i, p.guard, p.expr) for i, p in enumerate(f.pieces)]
    if f.default != INF:
        entries.append((-1, f.default_region(), Const(f.default)))
    for i, guard, e in entries:
        args = abs_arguments(e)
        for part in guard.parts:
            if part.lo == part.hi:
                out.append(SmoothPiece(part, e, None, i))
                continue
            cuts = sorted({z for a in args for z in sign_changes(a, part.lo, part.hi)})
            bounds = [part.lo] + cuts + [part.hi]
            for k in range(len(bounds) - 1):
                lo, hi = bounds[k], bounds[k + 1]
                lo_closed = part.lo_closed if k == 0 else False
                hi_closed = part.hi_closed if k == len(bounds) - 2 else True
                iv = Interval(lo, hi, lo_closed, hi_closed)
                d = derivative(e, 0, lambda a, lo=lo, hi=hi: interior_sign(a, lo, hi))
                out.append(SmoothPiece(iv, e, d, i))
    out.sort(key=lambda sp: (sp.interval.lo, not sp.interval.lo_closed))
    return tuple(out)


def smooth_piece_at(f: PiecewiseFunc, x: float, side: str):
    """The smooth piece covering a punctured one-sided neighbourhood of ``x``."""
    for sp in f.smooth_pieces():
        iv = sp.interval
        if side == "right" and iv.lo <= x < iv.hi:
            return sp
        if side == "left" and iv.lo < x <= iv.hi:
            return sp
    return None


def add_functions(f: PiecewiseFunc, g: PiecewiseFunc) -> PiecewiseFunc:
    """Pointwise sum with the ``inf - inf = inf`` convention (1-D)."""
    if f.dim != 1 or g.dim != 1:
        raise ValueError("function sums are implemented in one dimension")
    fe = [(p.guard, p.expr) for p in f.pieces] + [(f.default_region(), Const(f.default))]
    ge = [(p.guard, p.expr) for p in g.pieces] + [(g.default_region(), Const(g.default))]
    pieces = []
    default = ext_add(f.default, g.default)
    for gf, ef in fe:
        for gg, eg in ge:
            common = gf.intersect(gg)
            if common.is_empty:
                continue
            e = _sum_expr(ef, eg)
            if isinstance(e, Const) and e.value == default:
                continue
            pieces.append(Piece(common, e))
    return PiecewiseFunc(tuple(pieces), default, 1, f"{f.name}+{g.name}")


def _sum_expr(a: Expr, b: Expr) -> Expr:
    for c, other in ((a, b), (b, a)):
        if isinstance(c, Const) and c.value == INF:
            return Const(INF)
        if isinstance(c, Const) and c.value == -INF:
            return Const(INF) if isinstance(other, Const) and other.value == INF else Const(-INF)
    return add(a, b)


def pull_back_segment(f: PiecewiseFunc, a, b) -> PiecewiseFunc:
    """``g(s) = f(a + s*u)`` with ``u = (b - a)/|b - a|``, as a 1-D function of arclength."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape[0] != f.dim or b.shape[0] != f.dim:
        raise ValueError("segment endpoints must match the function dimension")
    L = float(np.linalg.norm(b - a))
    if L == 0.0:
        raise ValueError("segment endpoints must differ")
    u = (b - a) / L
    s = Var(0)
    mapping = {i: add(Const(float(a[i])), mul(Const(float(u[i])), s)) for i in range(f.dim)}
    pieces = []
    for p in f.pieces:
        if isinstance(p.guard, IntervalSet):
            guard = p.guard.affine(1.0 / u[0], -a[0] / u[0])
        elif isinstance(p.guard, Everything):
            guard = IntervalSet.real_line()
        else:
            guard = p.guard.pullback(a, u)
        if not guard.is_empty:
            pieces.append(Piece(guard, substitute(p.expr, mapping)))
    return PiecewiseFunc(tuple(pieces), f.default, 1, f"{f.name}|seg")


def check_domain_point(f: PiecewiseFunc, omega, xbar) -> float:
    """Value ``f(xbar)``; raises :class:`DomainError` unless ``xbar`` is in ``omega`` and ``dom f``."""
    if not omega.contains(xbar, 1e-12):
        raise DomainError(f"point {np.ravel(xbar).tolist()} lies outside the set")
    v = f(np.ravel(np.asarray(xbar, dtype=float)))
    if not math.isfinite(v):
        raise DomainError(f"{f.name} is not finite at {np.ravel(xbar).tolist()}")
    return v

