"""Optimality checks, mean-value witnesses and convexity/monotonicity testers."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .calculus import (FAILS, HOLDS, INCONCLUSIVE, FuzzyCertificate, RuleReport, _jsonable,
                       approach_points, decompose, neighbourhood_modulus, sum_hypotheses)
from .errors import DomainError, SearchFailure
from .extreal import INF
from .intervals import IntervalSet, iset_minkowski
from .expr import try_eval
from .piecewise import PiecewiseFunc, add_functions, pull_back_segment, smooth_piece_at
from .regularity import check_lsc_relative, lip_estimate
from .sets import Interval1D, Segment, as_closed_set
from .subdiff import eps_regular_relative, segment_subdiff, subdiff
from .verdicts import Trit, Verdict

NECESSARY = "necessary-condition-holds"
VIOLATED = "violated"
GAP_TOL = 1e-9


@dataclass
class OptimalityVerdict:
    condition: str
    verdict: str
    witness: dict = field(default_factory=dict)

    @property
    def non_optimal(self) -> bool:
        """``True`` when the verdict certifies that the point is not a local minimizer."""
        return self.verdict == VIOLATED

    def to_json(self) -> dict:
        return {"condition": self.condition, "verdict": self.verdict,
                "non_optimality_certificate": self.non_optimal,
                "witness": _jsonable(self.witness)}


def _sets_at(f, omega, x, kind, eps=0.0) -> IntervalSet:
    if isinstance(omega, Segment):
        return segment_subdiff(f, omega.a, omega.b, x, kind, eps).set
    return subdiff(f, omega, x, kind, eps).set


def _zero_verdict(gaps: dict, tol: float) -> str:
    worst = max(gaps.values())
    if worst > 3 * tol:
        return VIOLATED
    return NECESSARY if worst <= tol else INCONCLUSIVE


def fermat_check(f: PiecewiseFunc, omega, xbar, eps_list=(0.0, 0.1, 1.0), tol: float = GAP_TOL,
                 limiting: bool = True) -> OptimalityVerdict:
    """Membership of ``0`` in each eps-regular set and in the limiting set."""
    omega = as_closed_set(omega)
    gaps, sets = {}, {}
    for eps in eps_list:
        s = _sets_at(f, omega, xbar, "eps_regular", eps)
        sets[f"eps={eps:g}"] = s
        gaps[f"eps={eps:g}"] = s.distance(0.0)
    if limiting:
        s = _sets_at(f, omega, xbar, "limiting_relative")
        sets["limiting"] = s
        gaps["limiting"] = s.distance(0.0)
    verdict = _zero_verdict(gaps, tol)
    cond = "fermat_limiting" if limiting else "fermat_eps"
    return OptimalityVerdict(cond, verdict, {"sets": sets, "gaps": gaps})


def sum_optimality_check(f1: PiecewiseFunc, f2: PiecewiseFunc, C, xbar,
                         tol: float = GAP_TOL) -> OptimalityVerdict:
    """Exact test of ``0`` in the Minkowski sum of the two limiting sets."""
    C = as_closed_set(C)
    hyp = sum_hypotheses(f1, f2, C, xbar)
    a = subdiff(f1, C, xbar, "limiting_relative").set
    b = subdiff(f2, C, xbar, "limiting_relative").set
    total = iset_minkowski(a, b)
    gap = total.distance(0.0)
    wit = {"first": a, "second": b, "sum": total, "gap": gap,
           "hypotheses": [{"name": n, "verdict": v} for n, v in hyp]}
    failed = [n for n, v in hyp if v != "pass"]
    if failed:
        wit["failed_hypotheses"] = failed
        if "f2_lsc_around" in failed and check_lsc_relative(f2, C, xbar).is_in:
            wit["lsc_at_not_around"] = True
        return OptimalityVerdict("sum_exact", INCONCLUSIVE, wit)
    verdict = _zero_verdict({"sum": gap}, tol)
    if verdict == NECESSARY:
        y = total.nearest(0.0)
        wit["decomposition"] = decompose(y, a, b)
    return OptimalityVerdict("sum_exact", verdict, wit)


def _is_grid_local_min(f, C, xbar, radius, density=256) -> bool:
    X = C.sample_ball(np.array([float(xbar)]), radius, density)
    F = f.eval_many(X)
    return bool(np.all(F >= f(xbar) - 1e-12 * max(1.0, abs(f(xbar)))))


def approx_optimality_search(f1: PiecewiseFunc, f2: PiecewiseFunc, C, xbar: float, eta: float,
                             tol: float = 1e-6, levels: int = 8) -> FuzzyCertificate:
    """Approximate optimality certificate near a local minimizer of ``f1 + f2`` on ``C``.

    Nearby points come from the ``eta``-ball with value proximity; the
    common tolerance ``eta_tilde`` sweeps ``4 eta (l + 1) 2^-j``, ``j >= 1``.
    """
    C = as_closed_set(C)
    if not eta > 0:
        raise ValueError("eta must be positive")
    s = add_functions(f1, f2)
    if not _is_grid_local_min(s, C, xbar, eta):
        raise ValueError(f"{xbar!r} is not a grid-local minimizer of the sum on the set")
    ell = lip_estimate(f1, C, xbar).value
    if not math.isfinite(ell):
        ell = neighbourhood_modulus(f1, C, xbar, eta)
    if not math.isfinite(ell):
        raise SearchFailure("first function is not Lipschitz near the point", {"lip": ell})
    top = 4.0 * eta * (ell + 1.0)
    tildes = [top * 2.0 ** -j for j in range(1, levels + 1)]
    best = None
    for x1, x2 in itertools.product(approach_points(f1, C, xbar, eta), approach_points(f2, C, xbar, eta)):
        for et in tildes:
            a = eps_regular_relative(f1, C, x1, et).set
            b = eps_regular_relative(f2, C, x2, et).set
            if a.is_empty or b.is_empty:
                continue
            total = iset_minkowski(a, b)
            y = total.nearest(0.0)
            gap = abs(y)
            key = (round(gap, 12), abs(x1 - xbar) + abs(x2 - xbar), et, (x1, x2))
            if best is None or key < best[0]:
                s1, s2 = decompose(y, a, b)
                best = (key, FuzzyCertificate(eta, x1, x2, et, et, s1, s2, gap))
    if best is None or best[1].gamma > tol:
        raise SearchFailure("no approximate optimality certificate below tolerance",
                            {"best": None if best is None else best[1].to_json(), "tol": tol})
    cert = best[1]
    cert.trend = [{"lip": ell, "eta_tilde_bound": top}]
    return cert


@dataclass(frozen=True)
class MinCandidate:
    x: object
    value: float
    basin_radius: float

    def to_json(self) -> dict:
        return _jsonable({"x": list(self.x) if isinstance(self.x, tuple) else self.x,
                          "value": self.value, "basin_radius": self.basin_radius})


def _basin(F, i, t):
    n = len(F)
    sides = []
    if i > 0:
        j = i
        while j > 0 and F[j - 1] >= F[j]:
            j -= 1
        sides.append(t[i] - t[j])
    if i < n - 1:
        j = i
        while j < n - 1 and F[j + 1] >= F[j]:
            j += 1
        sides.append(t[j] - t[i])
    return float(min(sides)) if sides else INF


def _polish(f, x: float, lo: float, hi: float) -> float:
    """Root of the piece derivative bracketing ``x``; value search alone stalls near 1e-8."""
    sp = smooth_piece_at(f, x, "right") or smooth_piece_at(f, x, "left")
    if sp is None or sp.deriv is None:
        return x
    a, b = max(lo, sp.interval.lo), min(hi, sp.interval.hi)
    if not a < b:
        return x
    da, db = try_eval(sp.deriv, a), try_eval(sp.deriv, b)
    if not (math.isfinite(da) and math.isfinite(db)) or not (da < 0 < db):
        return x
    return float(brentq(lambda s: try_eval(sp.deriv, s), a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))


def _scan_1d(f, omega: Interval1D, density: int, window: tuple):
    out = []
    for part in omega.as_intervalset().parts:
        lo, hi = max(part.lo, window[0]), min(part.hi, window[1])
        if lo > hi:
            continue
        if lo == hi:
            v = f(lo)
            if math.isfinite(v):
                out.append(MinCandidate(lo, v, INF))
            continue
        t = np.linspace(lo, hi, density)
        F = f.eval_many(t[:, None])
        fin = np.isfinite(F)
        # a window edge inside the set is not a boundary; require strict descent there
        open_lo, open_hi = lo > part.lo, hi < part.hi
        prev_min = False
        for i in range(density):
            if not fin[i]:
                prev_min = False
                continue
            left = (i == 0 and not open_lo) or (i > 0 and F[i] <= F[i - 1])
            right = (i == density - 1 and not open_hi) or (i < density - 1 and F[i] <= F[i + 1])
            if not (left and right):
                prev_min = False
                continue
            if prev_min and F[i] == F[i - 1]:
                continue  # plateau: keep its leftmost point
            prev_min = True
            x, v = float(t[i]), float(F[i])
            if 0 < i < density - 1 and fin[i - 1] and fin[i + 1]:
                res = minimize_scalar(lambda s: float(f(s)), bounds=(t[i - 1], t[i + 1]),
                                      method="bounded", options={"xatol": 1e-12})
                if math.isfinite(res.fun) and res.fun < v:
                    x, v = float(res.x), float(res.fun)
                xp = _polish(f, x, float(t[i - 1]), float(t[i + 1]))
                vp = f(xp)
                if vp <= v:
                    x, v = xp, vp
            out.append(MinCandidate(x, v, _basin(F, i, t)))
    return out


def local_min_scan(f: PiecewiseFunc, omega, density: int = 2001, window=(-10.0, 10.0)) -> list:
    """Grid-and-refine local minimizers of ``f`` on a 1-D set or a segment."""
    omega = as_closed_set(omega)
    if isinstance(omega, Segment):
        g = pull_back_segment(f, omega.a, omega.b)
        found = _scan_1d(g, Interval1D(IntervalSet.closed(0.0, omega.length)), density,
                         (0.0, omega.length))
        u = omega.direction
        return [MinCandidate(tuple(float(v) for v in omega.a + c.x * u), c.value, c.basin_radius)
                for c in found]
    if f.dim != 1:
        raise ValueError("local_min_scan needs a 1-D function or a segment")
    return _scan_1d(f, omega, density, window)


# -- mean values --------------------------------------------------------------

@dataclass
class MeanValueWitness:
    c: object
    t: float
    xstar: tuple
    sigma: float
    phi_min: float
    inequality_residual: float
    scaled_residual: float
    equality_residual: float | None
    equality_case: bool
    subgradients: IntervalSet

    def to_json(self) -> dict:
        return _jsonable({
            "c": list(self.c) if isinstance(self.c, tuple) else self.c, "t": self.t,
            "xstar": list(self.xstar), "sigma": self.sigma, "phi_min": self.phi_min,
            "checks": {"inequality": self.inequality_residual, "scaled": self.scaled_residual,
                       "equality": self.equality_residual},
            "equality_case": self.equality_case, "subgradients": self.subgradients,
        })


def mean_value_witness(f: PiecewiseFunc, a, b, density: int = 4097, tol: float = 1e-6,
                       trace_csv=None) -> MeanValueWitness:
    """Minimize ``phi(x) = f(x) + slope * |x - b|`` on ``[a, b]`` and read off a subgradient.

    The minimizer is taken in ``[a, b)``, smallest arclength on ties. The
    selected ``x*`` is the endpoint of the limiting set maximizing
    ``<x*, b - a>``; the equality residual is the distance from the secant
    slope to the whole set.
    """
    seg = Segment(a, b)
    fa, fb = f(seg.a), f(seg.b)
    if not (math.isfinite(fa) and math.isfinite(fb)):
        raise DomainError("f must be finite at both endpoints")
    L, u = seg.length, seg.direction
    slope = (fb - fa) / L
    g = pull_back_segment(f, seg.a, seg.b)

    def phi(t):
        t = np.asarray(t, dtype=float)
        return g.eval_many(np.atleast_1d(t)[:, None]) + slope * (L - t)

    t = np.linspace(0.0, L, density)
    P = phi(t)
    if trace_csv is not None:
        F = g.eval_many(t[:, None])
        with open(trace_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "f", "phi"])
            for row in zip(t, F, P):
                w.writerow([repr(float(v)) for v in row])
    m = float(np.min(P[:-1]))
    if P[-1] < m:
        m = float(P[-1])
    tie = 1e-12 * max(1.0, abs(m))
    i = int(np.flatnonzero(P[:-1] <= m + tie)[0]) if np.any(P[:-1] <= m + tie) else density - 1
    ct, cv = float(t[i]), float(P[i])
    if 0 < i < density - 1:
        res = minimize_scalar(lambda s: float(phi(s)[0]), bounds=(t[i - 1], t[i + 1]),
                              method="bounded", options={"xatol": 1e-12})
        if res.fun < cv - tie:
            ct, cv = float(res.x), float(res.fun)
    if ct >= L:
        raise SearchFailure("no minimizer of phi in [a, b)", {"phi_b": float(P[-1])})
    if ct <= 1e-12 * max(1.0, L):
        ct = 0.0
    c = seg.a + ct * u
    S = segment_subdiff(f, seg.a, seg.b, c, "limiting_relative").set
    if S.is_empty:
        lip = lip_estimate(f, seg, c)
        raise SearchFailure("empty limiting set at the minimizer",
                            {"c": c.tolist(), "relatively_lipschitz": lip.finite and lip.confident})
    sigma = S.sup
    if not math.isfinite(sigma):
        sigma = S.intersect(IntervalSet.closed(slope, INF)).inf
    ineq = sigma * L - (fb - fa)
    scaled = (L - ct) * (sigma - slope)
    eq_case = ct != 0.0
    eq_res = S.distance(slope) * L if eq_case else None
    cval = float(c[0]) if c.shape[0] == 1 else tuple(float(v) for v in c)
    return MeanValueWitness(cval, ct, tuple(float(sigma * v) for v in u), float(sigma), cv,
                            float(ineq), float(scaled), eq_res, eq_case, S)


# -- convexity and monotonicity -------------------------------------------------

def _segment_grid(a, b, n):
    seg = Segment(a, b)
    t = np.linspace(0.0, seg.length, n)
    return seg, t, seg.a[None, :] + t[:, None] * seg.direction[None, :]


def convexity_check(f: PiecewiseFunc, a, b, grid: int = 33, tol: float = 1e-9) -> Trit:
    """Secant inequality over grid pairs on ``[a, b]`` with ``lambda = k/8``."""
    _, _, X = _segment_grid(a, b, grid)
    F = f.eval_many(X)
    lams = np.arange(1, 8) / 8.0
    worst, where = -INF, None
    for i, j in itertools.combinations(range(grid), 2):
        Z = lams[:, None] * X[i][None, :] + (1 - lams)[:, None] * X[j][None, :]
        gap = f.eval_many(Z) - (lams * F[i] + (1 - lams) * F[j])
        k = int(np.argmax(gap))
        if gap[k] > worst:
            worst, where = float(gap[k]), (X[i].tolist(), X[j].tolist(), float(lams[k]))
    diag = {"max_violation": worst, "at": where}
    if worst > 3 * tol:
        return Trit(Verdict.OUT, worst, diag)
    return Trit(Verdict.IN if worst <= tol else Verdict.UNKNOWN, worst, diag)


def monotonicity_check(kind: str, f: PiecewiseFunc, a, b, grid: int = 33, tol: float = 1e-9) -> Trit:
    """``sup F(u) <= inf F(v)`` for grid points ``u < v`` (arclength order).

    ``kind`` is ``"plain"`` for the subdifferential of the restricted
    function or ``"limiting"`` for the relative limiting one.
    """
    sel = {"plain": "limiting_plain", "limiting": "limiting_relative"}.get(kind, kind)
    seg, t, X = _segment_grid(a, b, grid)
    run_sup, run_at = -INF, None
    worst, where, seen = -INF, None, 0
    for tk, x in zip(t, X):
        S = segment_subdiff(f, seg.a, seg.b, x, sel).set
        if S.is_empty:
            continue
        seen += 1
        if run_at is not None:
            gap = run_sup - S.inf
            if gap > worst:
                worst, where = gap, (run_at, float(tk))
        if S.sup > run_sup or run_at is None:
            run_sup, run_at = S.sup, float(tk)
    if seen == 0:
        return Trit(Verdict.UNKNOWN, INF, {"reason": "all values empty"})
    diag = {"max_gap": worst, "at": where, "nonempty": seen}
    if worst > 3 * tol:
        return Trit(Verdict.OUT, worst, diag)
    return Trit(Verdict.IN if worst <= tol else Verdict.UNKNOWN, worst, diag)


def _continuity_on_segment(f, a, b, grid=257) -> tuple:
    seg, t, X = _segment_grid(a, b, grid)
    F = f.eval_many(X)
    if not np.all(np.isfinite(F)):
        return False, "value not finite on the segment"
    g = pull_back_segment(f, seg.a, seg.b)
    for bp in g.breakpoints():
        if 0.0 <= bp <= seg.length:
            v = g(bp)
            for s in (bp - 1e-9, bp + 1e-9):
                if 0.0 <= s <= seg.length and abs(g(s) - v) > 1e-6 * max(1.0, abs(v)):
                    return False, f"jump at arclength {bp!r}"
    return True, None


def equivalence_report(f: PiecewiseFunc, a, b, grid: int = 33, tol: float = 1e-9) -> RuleReport:
    """Convexity versus monotonicity of the two subdifferential maps on ``[a, b]``."""
    ok, why = _continuity_on_segment(f, a, b)
    hyp = [("proper_continuous", "pass" if ok else "fail")]
    tols = {"tol": tol, "grid": grid, "monotone_definition": "classical, pairing >= 0"}
    if not ok:
        return RuleReport("convexity_monotonicity", INCONCLUSIVE, hyp, {"reason": why}, tols)
    seg, t, X = _segment_grid(a, b, grid)
    conv = convexity_check(f, a, b, grid, tol)
    mono_plain = monotonicity_check("plain", f, a, b, grid, tol)
    mono_lim = monotonicity_check("limiting", f, a, b, grid, tol)
    lips = [lip_estimate(f, seg, x) for x in X[1:-1]]
    lip_ok = all(e.finite and e.confident for e in lips)

    def with_lip(tr):
        if tr.verdict is Verdict.IN and not lip_ok:
            return Verdict.OUT
        return tr.verdict

    verdicts = {"convex": conv.verdict, "plain_monotone": mono_plain.verdict,
                "plain_monotone_lipschitz": with_lip(mono_plain),
                "limiting_monotone_lipschitz": with_lip(mono_lim)}
    wit = {k: v.value for k, v in verdicts.items()}
    wit["diagnostics"] = {"convex": conv.diagnostics, "plain": mono_plain.diagnostics,
                          "limiting": mono_lim.diagnostics}
    if any(v is Verdict.UNKNOWN for v in verdicts.values()):
        return RuleReport("convexity_monotonicity", INCONCLUSIVE, hyp, wit, tols)
    bad = {}
    if len(set(verdicts.values())) > 1:
        bad["disagreement"] = wit.copy()
    if conv.verdict is Verdict.IN and not lip_ok:
        i = next(k for k, e in enumerate(lips) if not (e.finite and e.confident))
        bad["lipschitz_at"] = X[1 + i].tolist()
    if bad:
        wit["counterexample"] = bad
    return RuleReport("convexity_monotonicity", FAILS if bad else HOLDS, hyp, wit, tols)
