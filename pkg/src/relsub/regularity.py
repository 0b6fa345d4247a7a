"""Relative Lipschitz and lower-semicontinuity estimates from sampled grids."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .expr import evaluate
from .extreal import INF
from .kernels import pairwise_lipschitz
from .piecewise import PiecewiseFunc
from .sets import ClosedSet, as_closed_set
from .verdicts import Trit, Verdict

DEFAULT_RADII = tuple(2.0 ** -j for j in range(17))


@dataclass(frozen=True)
class LipEstimate:
    value: float
    radius_schedule: tuple
    confident: bool
    per_radius: tuple = field(default=(), compare=False)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def to_json(self) -> dict:
        from .extreal import fmt
        return {"value": fmt(self.value), "confident": self.confident,
                "per_radius": [fmt(v) for v in self.per_radius]}


def _require(f, omega, xbar):
    omega = as_closed_set(omega)
    xb = np.ravel(np.asarray(xbar, dtype=float))
    if not omega.contains(xb, 1e-12):
        raise DomainError(f"{xb.tolist()} is not in {omega.describe()}")
    fbar = f(xb)
    if not math.isfinite(fbar):
        raise DomainError(f"{f.name} is not finite at {xb.tolist()}")
    return omega, xb, fbar


def _abs_derivatives(f: PiecewiseFunc, xs: np.ndarray) -> float:
    """Largest ``|f'|`` over grid points inside smooth pieces (1-D)."""
    best = 0.0
    for sp in f.smooth_pieces():
        iv = sp.interval
        if sp.deriv is None or iv.lo == iv.hi:
            continue
        sel = xs[(xs > iv.lo) & (xs < iv.hi)]
        if sel.size:
            vals = np.abs(evaluate(sp.deriv, sel[:, None]))
            best = max(best, float(vals.max()))
    return best


def lip_estimate(f: PiecewiseFunc, omega, xbar, radii=DEFAULT_RADII, density: int = 64) -> LipEstimate:
    """Estimated ``lip_Omega f(xbar)``: min over radii of the max grid quotient."""
    omega, xb, _ = _require(f, omega, xbar)
    return _lip_cached(f, omega, tuple(xb), tuple(radii), density)


@functools.lru_cache(maxsize=4096)
def _lip_cached(f, omega: ClosedSet, xb: tuple, radii: tuple, density: int) -> LipEstimate:
    xb = np.array(xb)
    per = []
    for r in radii:
        X = omega.sample_ball(xb, r, density)
        F = f.eval_many(X)
        if not np.all(np.isfinite(F)):
            per.append(INF)
            continue
        q = pairwise_lipschitz(X, F)
        if f.dim == 1:
            q = max(q, _abs_derivatives(f, X[:, 0]))
        per.append(q)
    value = min(per)
    confident = math.isfinite(value)
    if confident and per[-1] > 2.0 * value + 1e-12:
        # quotients grow as the ball shrinks: a jump or a vertical slope at xbar
        value, confident = INF, False
    return LipEstimate(value, radii, confident, tuple(per))


def check_lsc_relative(f: PiecewiseFunc, omega, xbar, tol: float = 1e-8) -> Trit:
    """Sampled relative lower semicontinuity at ``xbar``."""
    omega, xb, fbar = _require(f, omega, xbar)
    mins, hs = [], []
    for j in range(1, 31):
        r = 2.0 ** -j
        X = omega.sample_ball(xb, r, 16)
        keep = np.linalg.norm(X - xb[None, :], axis=1) > 0
        F = f.eval_many(X[keep]) if keep.any() else np.array([INF])
        mins.append(float(F.min()) if F.size else INF)
        hs.append(r)
    m1, m0 = mins[-1], mins[-2]
    if math.isfinite(m1) and math.isfinite(m0):
        liminf = m1 + (m1 - m0) * hs[-1] / (hs[-2] - hs[-1])
    else:
        liminf = m1
    margin = fbar - liminf if math.isfinite(liminf) else (-INF if liminf > 0 else INF)
    scaled = tol * max(1.0, abs(fbar))
    return Trit.from_margin(margin, scaled, {"liminf": liminf, "value": fbar})


def check_lsc_around(f: PiecewiseFunc, omega, xbar, radius: float = 2.0 ** -5,
                     density: int = 64, tol: float = 1e-8) -> Trit:
    """Relative lsc at every sampled point of ``omega`` near ``xbar``.

    A neighbour of ``xbar`` in ``omega`` where ``f`` is not finite also
    counts as a failure: the neighbourhood must lie in the domain.
    """
    omega, xb, _ = _require(f, omega, xbar)
    X = omega.sample_ball(xb, radius, density)
    if f.dim == 1:
        bps = [b for b in f.breakpoints() if abs(b - xb[0]) <= radius and omega.contains(b, 0.0)]
        if bps:
            X = np.unique(np.concatenate([X[:, 0], bps]))[:, None]
    F = f.eval_many(X)
    bad = ~np.isfinite(F)
    if bad.any():
        p = X[np.argmax(bad)]
        return Trit(Verdict.OUT, INF, {"reason": "value not finite near the point",
                                       "point": p.tolist(), "at": check_lsc_relative(f, omega, xb).verdict.value})
    worst = -INF
    for x in X:
        t = check_lsc_relative(f, omega, x, tol)
        worst = max(worst, t.margin)
        if t.is_out:
            return Trit(Verdict.OUT, t.margin, {"reason": "lsc fails", "point": x.tolist()})
    return Trit(Verdict.IN, worst, {"points": int(X.shape[0])})


def relatively_lipschitz(f, omega, xbar) -> bool:
    est = lip_estimate(f, omega, xbar)
    return est.finite and est.confident
