"""Checks of calculus rules for relative subdifferentials.

Every check returns a :class:`RuleReport`. A ``fails`` verdict always
carries a concrete counterexample in ``witnesses``; unmet hypotheses give
``inconclusive``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .extreal import INF, fmt
from .intervals import IntervalSet, iset_minkowski
from .piecewise import PiecewiseFunc, add_functions
from .regularity import check_lsc_around, lip_estimate
from .sets import as_closed_set
from .subdiff import eps_regular_relative, limiting_plain, limiting_relative

HOLDS, FAILS, INCONCLUSIVE = "holds", "fails", "inconclusive"
SET_TOL = 1e-9


@dataclass
class RuleReport:
    rule: str
    verdict: str
    hypotheses: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "verdict": self.verdict,
            "hypotheses": [{"name": n, "verdict": v} for n, v in self.hypotheses],
            "witnesses": _jsonable(self.witnesses),
            "tolerances": _jsonable(self.tolerances),
        }


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, IntervalSet):
        return str(v)
    if isinstance(v, (float, np.floating)):
        return fmt(float(v)) if not math.isfinite(v) else float(v)
    if isinstance(v, np.integer):
        return int(v)
    if hasattr(v, "to_json"):
        return v.to_json()
    return v


def sets_close(a: IntervalSet, b: IntervalSet, rtol: float = 1e-12) -> bool:
    """Equality of canonical sets up to a relative endpoint tolerance."""
    if len(a) != len(b):
        return False
    for p, q in zip(a.parts, b.parts):
        for u, v in ((p.lo, q.lo), (p.hi, q.hi)):
            if u != v and not (math.isfinite(u) and math.isfinite(v)
                               and abs(u - v) <= rtol * max(1.0, abs(u), abs(v))):
                return False
    return True


def _escape_point(a: IntervalSet, b: IntervalSet, tol: float):
    """A point of ``a`` outside ``b`` inflated by ``tol``, or ``None``."""
    big = b.inflate(tol)
    diff = a.difference(big)
    if diff.is_empty:
        return None
    p = diff.parts[0]
    if math.isfinite(p.lo) and math.isfinite(p.hi):
        return 0.5 * (p.lo + p.hi)
    if math.isfinite(p.lo):
        return p.lo + 1.0
    if math.isfinite(p.hi):
        return p.hi - 1.0
    return 0.0


def scale_set(s: IntervalSet, lam: float) -> IntervalSet:
    return s.affine(lam, 0.0)


def scalar_rule_check(f: PiecewiseFunc, omega, xbar, lam: float, eps: float = 0.0) -> RuleReport:
    """Scalar multiplication sandwich and, at ``eps = 0``, the two equalities."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    eps_hat = eps / max(lam, 1.0)
    eps_tilde = eps * max(1.0 / lam, 1.0)
    g = f.scale(lam)
    inner = scale_set(eps_regular_relative(f, omega, xbar, eps_hat).set, lam)
    middle = eps_regular_relative(g, omega, xbar, eps).set
    outer = scale_set(eps_regular_relative(f, omega, xbar, eps_tilde).set, lam)
    witnesses = {"inner": inner, "middle": middle, "outer": outer}
    failures = {}
    for name, a, b in (("inner_in_middle", inner, middle), ("middle_in_outer", middle, outer)):
        p = _escape_point(a, b, SET_TOL)
        if p is not None:
            failures[name] = p
    if eps == 0.0:
        reg_f = scale_set(eps_regular_relative(f, omega, xbar, 0.0).set, lam)
        lim_f = scale_set(limiting_relative(f, omega, xbar).set, lam)
        lim_g = limiting_relative(g, omega, xbar).set
        witnesses.update(limiting_scaled=lim_f, limiting_of_scaled=lim_g)
        if not sets_close(middle, reg_f):
            failures["regular_equality"] = [middle, reg_f]
        if not sets_close(lim_g, lim_f):
            failures["limiting_equality"] = [lim_g, lim_f]
    if failures:
        witnesses["counterexample"] = failures
    return RuleReport("scalar_multiplication", FAILS if failures else HOLDS, [],
                      witnesses, {"set_tol": SET_TOL, "equality_rtol": 1e-12,
                                  "eps_hat": eps_hat, "eps_tilde": eps_tilde})


def _grid_points(omega, xbar: float, radius: float, n: int = 21) -> list:
    omega = as_closed_set(omega)
    xs = np.linspace(xbar - radius, xbar + radius, n)
    pts = [float(x) for x in xs if omega.contains(x, 0.0)]
    pts.append(float(xbar))
    return sorted(set(pts))


def neighbourhood_modulus(f: PiecewiseFunc, omega, xbar, radius: float) -> float:
    """Lipschitz modulus of ``f`` on ``omega`` near ``xbar`` (grid quotients plus ``|f'|``)."""
    from .kernels import pairwise_lipschitz
    from .regularity import _abs_derivatives
    omega = as_closed_set(omega)
    X = omega.sample_ball(np.array([xbar]), radius, 256)
    F = f.eval_many(X)
    if not np.all(np.isfinite(F)):
        return INF
    return max(pairwise_lipschitz(X, F), _abs_derivatives(f, X[:, 0]))


def lipschitz_bound_check(f: PiecewiseFunc, omega, xbar, eps: float = 0.0, radius: float = 0.5,
                          tol: float = 1e-6) -> RuleReport:
    """Norm bound ``|s| <= l + eps(1 + l)`` for eps-regular subgradients near ``xbar``.

    ``l`` is the sampled modulus on the ball of ``radius``; subgradients are
    tested on the inner half-ball so every test point has the whole local
    neighbourhood inside the measured region.
    """
    est = lip_estimate(f, omega, xbar)
    ell = neighbourhood_modulus(f, omega, xbar, radius)
    hyp = [("relatively_lipschitz", "pass" if est.confident and math.isfinite(ell) else "fail")]
    if hyp[0][1] == "fail":
        return RuleReport("lipschitz_bound", INCONCLUSIVE, hyp, {"lip": est}, {"tol": tol})
    bound = ell + eps * (1.0 + ell)
    worst, worst_x = 0.0, None
    for x in _grid_points(omega, float(xbar), 0.5 * radius):
        s = eps_regular_relative(f, omega, x, eps).set
        if s.is_empty:
            continue
        m = max(abs(s.inf), abs(s.sup))
        if m > worst or worst_x is None:
            worst, worst_x = m, x
    verdict = HOLDS if worst <= bound + tol else FAILS
    wit = {"modulus": ell, "bound": bound, "max_norm": worst, "at": worst_x,
           "ratio": (worst / bound) if bound > 0 else (0.0 if worst == 0 else INF)}
    if verdict == FAILS:
        wit["counterexample"] = {"point": worst_x, "norm": worst}
    return RuleReport("lipschitz_bound", verdict, hyp, wit, {"tol": tol, "radius": radius})


def inclusion_chain_check(f: PiecewiseFunc, omega, xbar) -> RuleReport:
    reg = eps_regular_relative(f, omega, xbar, 0.0).set
    lim = limiting_relative(f, omega, xbar).set
    plain = limiting_plain(f, omega, xbar).set
    wit = {"regular": reg, "limiting_relative": lim, "limiting_plain": plain}
    bad = {}
    for name, a, b in (("regular_in_limiting", reg, lim), ("limiting_in_plain", lim, plain)):
        p = _escape_point(a, b, SET_TOL)
        if p is not None:
            bad[name] = p
    if bad:
        wit["counterexample"] = bad
    return RuleReport("inclusion_chain", FAILS if bad else HOLDS, [], wit, {"set_tol": SET_TOL})


def sum_hypotheses(f1, f2, omega, xbar) -> list:
    omega = as_closed_set(omega)
    est = lip_estimate(f1, omega, xbar)
    lsc = check_lsc_around(f2, omega, xbar)
    return [
        ("f1_relatively_lipschitz", "pass" if est.finite and est.confident else "fail"),
        ("f2_lsc_around", "pass" if lsc.is_in else "fail"),
        ("set_convex", "pass" if omega.is_convex else "fail"),
    ]


def sum_rule_check(f1: PiecewiseFunc, f2: PiecewiseFunc, omega, xbar) -> RuleReport:
    """Limiting sum-rule inclusion, checked exactly with Minkowski sums."""
    hyp = sum_hypotheses(f1, f2, omega, xbar)
    s = add_functions(f1, f2)
    lhs = limiting_relative(s, omega, xbar).set
    a = limiting_relative(f1, omega, xbar).set
    b = limiting_relative(f2, omega, xbar).set
    rhs = iset_minkowski(a, b)
    wit = {"sum": lhs, "first": a, "second": b, "minkowski": rhs}
    if any(v != "pass" for _, v in hyp):
        return RuleReport("sum_rule", INCONCLUSIVE, hyp, wit, {"set_tol": SET_TOL})
    p = _escape_point(lhs, rhs, SET_TOL)
    if p is not None:
        wit["counterexample"] = p
    return RuleReport("sum_rule", FAILS if p is not None else HOLDS, hyp, wit, {"set_tol": SET_TOL})


@dataclass
class FuzzyCertificate:
    eta: float
    x1: float
    x2: float
    eta1: float
    eta2: float
    s1: float
    s2: float
    gamma: float
    trend: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {k: _jsonable(getattr(self, k)) for k in
               ("eta", "x1", "x2", "eta1", "eta2", "s1", "s2", "gamma")}
        out["trend"] = _jsonable(self.trend)
        return out


def _midpoint(iv):
    if math.isfinite(iv.lo) and math.isfinite(iv.hi):
        return 0.5 * (iv.lo + iv.hi)
    return None


def decompose(y: float, a: IntervalSet, b: IntervalSet):
    """``(s1, s2)`` with ``s1 in a``, ``s2 in b``, ``s1 + s2 = y`` (``y`` in ``a + b``)."""
    best = None
    for p, q in itertools.product(a.parts, b.parts):
        lo = max(p.lo, y - q.hi)
        hi = min(p.hi, y - q.lo)
        if lo <= hi + 1e-12 * max(1.0, abs(y)):
            mp, mq = _midpoint(p), _midpoint(q)
            if mp is not None and mq is not None:
                aim = 0.5 * (mp + y - mq)
            elif mp is not None:
                aim = mp
            else:
                aim = y - mq if mq is not None else 0.5 * y
            s1 = min(max(aim, lo), hi)
            if best is None:
                best = (s1, y - s1)
    return best


def approach_points(f: PiecewiseFunc, omega, xbar: float, eta: float) -> list:
    """``xbar`` and ``xbar +- eta*{1/4, 1/2, 1}`` in ``omega`` with ``|f(x) - f(xbar)| <= eta``."""
    omega = as_closed_set(omega)
    fbar = f(xbar)
    out = [float(xbar)]
    for c in (0.25, 0.5, 1.0):
        for sgn in (-1.0, 1.0):
            x = float(xbar) + sgn * c * eta
            if omega.contains(x, 0.0):
                v = f(x)
                if math.isfinite(v) and abs(v - fbar) <= eta:
                    out.append(x)
    return sorted(out)


def _best_pair(f1, f2, omega, xbar, target, eta, levels):
    best = None
    etas = [eta * 2.0 ** -j for j in range(levels)]
    for x1 in approach_points(f1, omega, xbar, eta):
        for x2 in approach_points(f2, omega, xbar, eta):
            for e1, e2 in itertools.product(etas, etas):
                a = eps_regular_relative(f1, omega, x1, e1).set
                b = eps_regular_relative(f2, omega, x2, e2).set
                if a.is_empty or b.is_empty:
                    continue
                total = iset_minkowski(a, b)
                y = total.nearest(target)
                gamma = abs(target - y)
                key = (round(gamma, 12), abs(x1 - xbar) + abs(x2 - xbar), e1 + e2, e1, (x1, x2))
                if best is None or key < best[0]:
                    s1, s2 = decompose(y, a, b)
                    best = (key, FuzzyCertificate(eta, x1, x2, e1, e2, s1, s2, gamma))
    return None if best is None else best[1]


def fuzzy_sum_search(f1: PiecewiseFunc, f2: PiecewiseFunc, omega, xbar: float, xstar: float,
                     eps: float, eta: float, halvings: int = 4, levels: int = 6) -> FuzzyCertificate:
    """Grid search for a fuzzy sum-rule decomposition of ``xstar``.

    Raises ``ValueError`` when ``xstar`` is not an ``eps``-regular subgradient
    of the sum or ``eta <= eps``; returns ``None`` when every candidate set
    is empty.
    """
    if not eta > eps:
        raise ValueError("eta must exceed eps")
    s = add_functions(f1, f2)
    top = eps_regular_relative(s, omega, xbar, eps).set
    if not top.contains(xstar, 1e-12):
        raise ValueError(f"{fmt(xstar)} is not in the eps-regular set {top} of the sum")
    cert = _best_pair(f1, f2, omega, xbar, xstar, eta, levels)
    if cert is None:
        return None
    trend = []
    for j in range(halvings + 1):
        e = eta * 2.0 ** -j
        if e <= eps:
            break
        c = _best_pair(f1, f2, omega, xbar, xstar, e, levels)
        trend.append({"eta": e, "gamma": None if c is None else c.gamma,
                      "eta1": None if c is None else c.eta1, "eta2": None if c is None else c.eta2})
    cert.trend = trend
    return cert
