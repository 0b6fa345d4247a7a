"""Sampling oracle for epsilon-normal quotients and subdifferential sets.

Nothing here uses the analytic structure of the pieces: the epigraph of
``f_Omega`` is sampled inside shrinking balls around ``(xbar, f(xbar))``
and normalized pairings are maximized over the samples. Results are
deterministic for a fixed :class:`Schedule`.
"""

from __future__ import annotations

import csv
import functools
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, EstimationFailure, InconclusiveLimit, IsolatedEpigraphPoint
from .extreal import INF, NEG_INF
from .intervals import Interval, IntervalSet, iset_outer_limit
from .kernels import epi_quotient_blocks
from .piecewise import PiecewiseFunc
from .sets import ClosedSet, as_closed_set
from .subdiff import SubdiffSet
from .verdicts import Trit, Verdict

ESTIMATED = "estimated"


@dataclass(frozen=True)
class Schedule:
    r0: float = 1.0
    rho: float = 0.5
    steps: int = 16
    grid_density: int = 64
    epi_r_grid: tuple = (0.0, 1e-6, 1e-3, 0.1, 1.0)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "epi_r_grid", tuple(float(v) for v in self.epi_r_grid))
        if not (0.0 < self.rho < 1.0):
            raise ValueError("rho must lie in (0, 1)")
        if self.r0 <= 0 or self.steps < 3:
            raise ValueError("need r0 > 0 and at least 3 radii")
        if self.radii[-1] <= 1e-9:
            raise ValueError("the smallest radius must stay above 1e-9")
        if self.grid_density < 8:
            raise ValueError("grid_density must be at least 8")
        if any(not 0.0 <= v <= 1.0 for v in self.epi_r_grid) or not self.epi_r_grid:
            raise ValueError("epi_r_grid entries are fractions in [0, 1]")

    @property
    def radii(self) -> tuple:
        return tuple(self.r0 * self.rho ** j for j in range(self.steps))

    @property
    def phase(self) -> float:
        """Grid offset (in cells) drawn from the seed."""
        return float(np.random.default_rng(self.seed).uniform(0.0, 0.25))

    def to_json(self) -> dict:
        d = asdict(self)
        d["epi_r_grid"] = list(self.epi_r_grid)
        return d

    @classmethod
    def from_mapping(cls, data: dict | None) -> "Schedule":
        data = dict(data or {})
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown schedule keys: {', '.join(sorted(unknown))}")
        if "epi_r_grid" in data:
            data["epi_r_grid"] = tuple(data["epi_r_grid"])
        return cls(**data)


DEFAULT_SCHEDULE = Schedule()


# -- epigraph clouds ----------------------------------------------------------

@dataclass(frozen=True)
class EpiCloud:
    dx: np.ndarray
    dr: np.ndarray
    starts: np.ndarray
    radii: tuple
    moving: tuple  # per block: number of samples with x != xbar

    @property
    def isolated(self) -> bool:
        return self.moving[-1] == 0

    def stationary(self) -> "EpiCloud":
        """Only the vertical samples above ``xbar``."""
        keep = np.all(self.dx == 0.0, axis=1)
        starts, counts = [0], []
        for b in range(len(self.radii)):
            sel = keep[self.starts[b]:self.starts[b + 1]]
            counts.append(int(sel.sum()))
            starts.append(starts[-1] + counts[-1])
        return EpiCloud(self.dx[keep], self.dr[keep], np.array(starts, dtype=np.int64),
                        self.radii, tuple(0 for _ in counts))


def _extra_points_1d(omega, c: float, r: float) -> np.ndarray:
    k = np.arange(1, 13)
    pts = np.concatenate([c + r * 2.0 ** -k, c - r * 2.0 ** -k, [c + r, c - r]])
    return np.array([p for p in pts if omega.contains(p, 0.0)])


@functools.lru_cache(maxsize=2048)
def _cloud(f: PiecewiseFunc, omega: ClosedSet, xbar: tuple, sched: Schedule, tail: int) -> EpiCloud:
    xb = np.array(xbar)
    fbar = float(f.eval_many(xb[None, :])[0])
    radii = sched.radii[-tail:] if tail else sched.radii
    dxs, drs, starts, moving = [], [], [0], []
    for r in radii:
        X = omega.sample_ball(xb, r, sched.grid_density, sched.phase)
        if f.dim == 1:
            extra = _extra_points_1d(omega, xb[0], r)
            if extra.size:
                X = np.unique(np.concatenate([X[:, 0], extra]))[:, None]
        if X.shape[0] == 0:
            X = xb[None, :]
        F = f.eval_many(X)
        H = X - xb[None, :]
        hn = np.linalg.norm(H, axis=1)
        ok = (hn <= r) & (F < INF)
        H, hn, F = H[ok], hn[ok], F[ok]
        v = np.sqrt(np.maximum(r * r - hn * hn, 0.0))
        with np.errstate(invalid="ignore"):
            lo = np.maximum(np.where(F == NEG_INF, -v, F - fbar), -v)
        keep = lo <= v
        H, hn, lo, v = H[keep], hn[keep], lo[keep], v[keep]
        fr = np.asarray(sched.epi_r_grid)
        DR = lo[:, None] + fr[None, :] * (v - lo)[:, None]
        DX = np.repeat(H, len(fr), axis=0)
        DR = DR.ravel()
        nz = (np.linalg.norm(DX, axis=1) > 0) | (DR != 0)
        DX, DR = DX[nz], DR[nz]
        # drop duplicate samples produced by collapsed vertical segments
        if DX.shape[0]:
            uniq = np.unique(np.column_stack([DX, DR]), axis=0)
            DX, DR = uniq[:, :-1], uniq[:, -1]
        dxs.append(DX)
        drs.append(DR)
        starts.append(starts[-1] + DX.shape[0])
        moving.append(int(np.count_nonzero(np.linalg.norm(DX, axis=1) > 0)))
    dim = xb.shape[0]
    dx = np.ascontiguousarray(np.vstack(dxs) if dxs else np.zeros((0, dim)))
    dr = np.ascontiguousarray(np.concatenate(drs) if drs else np.zeros(0))
    return EpiCloud(dx, dr, np.array(starts, dtype=np.int64), tuple(radii), tuple(moving))


def epi_cloud(f: PiecewiseFunc, omega, xbar, sched: Schedule = DEFAULT_SCHEDULE, tail: int = 3) -> EpiCloud:
    omega = as_closed_set(omega)
    xb = tuple(float(v) for v in np.ravel(np.asarray(xbar, dtype=float)))
    if not omega.contains(np.array(xb), 1e-12):
        raise DomainError(f"{list(xb)} is not in the set")
    fbar = f(np.array(xb))
    if not math.isfinite(fbar):
        raise DomainError(f"{f.name} is not finite at {list(xb)}")
    return _cloud(f, omega, xb, sched, tail)


def _block_quotients(cloud: EpiCloud, xs: np.ndarray) -> np.ndarray:
    return epi_quotient_blocks(cloud.dx, cloud.dr, cloud.starts, xs)


def _summary(per_radius: np.ndarray) -> np.ndarray:
    """Median of the last three radii (rows are functionals)."""
    return np.median(per_radius[:, -3:], axis=1)


# -- public oracle operations -------------------------------------------------

def quotient_limsup_epi(f, omega, xbar, xstar, sched: Schedule = DEFAULT_SCHEDULE,
                        full: bool = False):
    """Estimated limsup of normalized epigraph pairings with ``(xstar, -1)``.

    Returns the median over the three smallest radii; with ``full=True``
    also the per-radius maxima.
    """
    cloud = epi_cloud(f, omega, xbar, sched, tail=0 if full else 3)
    if cloud.isolated:
        raise IsolatedEpigraphPoint("no epigraph samples off the vertical line at the smallest radii")
    xs = np.atleast_2d(np.asarray(xstar, dtype=float).reshape(1, -1))
    per = _block_quotients(cloud, xs)
    value = float(_summary(per)[0])
    return (value, per[0].tolist()) if full else value


def tangent_member(S, xbar, v, sched: Schedule = DEFAULT_SCHEDULE, tol: float = 1e-6) -> Trit:
    """Tangency of direction ``v`` from distance quotients ``dist(xbar + t v, S)/t``."""
    S = as_closed_set(S)
    xb = np.ravel(np.asarray(xbar, dtype=float))
    v = np.ravel(np.asarray(v, dtype=float))
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        return Trit(Verdict.IN, 0.0)
    u = v / nv
    qs = [S.distance(xb + t * u) / t for t in sched.radii]
    value = float(np.median(qs[-3:]))
    return Trit.from_margin(value, tol, {"quotients": qs[-3:]})


def _tangent_margin_1d(S, x, sched):
    """Tangent quotients for the directions -1 and +1."""
    return {s: tangent_member(S, x, s, sched).margin for s in (-1.0, 1.0)}


def member_eps_regular(f, omega, xbar, xstar, eps: float, sched: Schedule = DEFAULT_SCHEDULE,
                       tol: float = 1e-4, relative: bool = True) -> Trit:
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    cloud = epi_cloud(f, omega, xbar, sched)
    if cloud.isolated:
        cloud = cloud.stationary()
    xs = np.atleast_2d(np.asarray(xstar, dtype=float).reshape(1, -1))
    q = float(_summary(_block_quotients(cloud, xs))[0])
    margin = q - eps
    diag = {"quotient": q}
    if relative:
        t = tangent_member(omega, xbar, xs[0], sched).margin
        diag["tangent"] = t
        margin = max(margin, t)
    return Trit.from_margin(margin, tol, diag)


class _Margins:
    """Vectorized membership margins for scalar candidates in 1-D."""

    def __init__(self, f, omega, x, eps, sched, relative):
        cloud = epi_cloud(f, omega, x, sched)
        self.cloud = cloud.stationary() if cloud.isolated else cloud
        self.eps = eps
        self.tangent = _tangent_margin_1d(omega, x, sched) if relative else {-1.0: 0.0, 1.0: 0.0}

    def __call__(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        q = _summary(_block_quotients(self.cloud, s[:, None])) - self.eps
        t = np.where(s > 0, self.tangent[1.0], np.where(s < 0, self.tangent[-1.0], 0.0))
        return np.maximum(q, t)


def _bisect(margin, a: float, b: float, tol: float, width: float) -> float:
    """Boundary between ``a`` (inside) and ``b`` (outside)."""
    while abs(b - a) > width:
        m = 0.5 * (a + b)
        if margin(m)[0] <= tol:
            a = m
        else:
            b = m
    return a


def reconstruct_1d(f, omega, xbar, eps: float, sched: Schedule = DEFAULT_SCHEDULE,
                   tol: float = 1e-4, cap: float | None = None, n_candidates: int = 2048,
                   relative: bool = True, csv_path=None) -> SubdiffSet:
    """Rebuild the ``eps``-regular set from membership tests on a candidate grid."""
    omega = as_closed_set(omega)
    if f.dim != 1:
        raise ValueError("reconstruct_1d needs a 1-D function")
    x = float(np.ravel(np.asarray(xbar, dtype=float))[0])
    if cap is None:
        from .regularity import lip_estimate
        lip = lip_estimate(f, omega, x).value
        cap = 10.0 if not math.isfinite(lip) else max(10.0, 2.0 * lip)
    margin = _Margins(f, omega, x, float(eps), sched, relative)
    s = np.linspace(-cap, cap, n_candidates)
    m = margin(s)
    inside = m <= tol
    unknown = (m > tol) & (m <= 3 * tol)
    if unknown.mean() > 0.05:
        raise EstimationFailure("too many unknown verdicts",
                                {"unknown_fraction": float(unknown.mean()), "eps": eps})
    if csv_path is not None:
        _dump_csv(csv_path, s, m, tol)
    # singleton or thin sets can fall between grid nodes
    extra = []
    for i in range(n_candidates):
        lo_ok = i == 0 or m[i] <= m[i - 1]
        hi_ok = i == n_candidates - 1 or m[i] <= m[i + 1]
        if lo_ok and hi_ok and not inside[i] and m[i] <= 0.5:
            a, b = s[max(i - 1, 0)], s[min(i + 1, n_candidates - 1)]
            res = minimize_scalar(lambda t: float(margin(t)[0]), bounds=(a, b), method="bounded",
                                  options={"xatol": tol * 1e-3})
            if res.fun <= tol:
                extra.append(float(res.x))
    width = tol
    parts = []
    idx = np.flatnonzero(inside)
    runs = np.split(idx, np.flatnonzero(np.diff(idx) > 1) + 1) if idx.size else []
    for run in runs:
        i0, i1 = int(run[0]), int(run[-1])
        lo = NEG_INF if i0 == 0 else _bisect(margin, s[i0], s[i0 - 1], tol, width)
        hi = INF if i1 == n_candidates - 1 else _bisect(margin, s[i1], s[i1 + 1], tol, width)
        parts.append(Interval(lo, hi, math.isfinite(lo), math.isfinite(hi)))
    for c in extra:
        step = s[1] - s[0]
        lo = _bisect(margin, c, c - step, tol, width)
        hi = _bisect(margin, c, c + step, tol, width)
        parts.append(Interval(lo, hi, True, True))
    result = IntervalSet(tuple(parts))
    flags = {"cap": cap, "unknown_fraction": float(unknown.mean())}
    return SubdiffSet(result, "eps_regular", float(eps), (1.0,), ESTIMATED, tol, flags)


def _dump_csv(path, s, m, tol):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["candidate", "verdict", "margin"])
        for si, mi in zip(s, m):
            w.writerow([repr(float(si)), Trit.from_margin(float(mi), tol).verdict.value, repr(float(mi))])


def limiting_points(f, omega, xbar, r: float) -> list:
    """Approach points at scale ``r``: ``xbar`` and ``xbar +- r*{1/4, 1/2, 1}`` with close values."""
    omega = as_closed_set(omega)
    fbar = f(xbar)
    pts = [float(xbar)]
    for c in (0.25, 0.5, 1.0):
        for sgn in (-1.0, 1.0):
            x = float(xbar) + sgn * c * r
            if omega.contains(x, 0.0):
                v = f(x)
                if math.isfinite(v) and abs(v - fbar) <= r:
                    pts.append(x)
    return sorted(pts)


def limiting_estimate(f, omega, xbar, sched: Schedule = DEFAULT_SCHEDULE, levels: int = 8,
                      tol: float = 1e-4, relative: bool = True, tol_lim: float = 1e-3) -> SubdiffSet:
    """Outer limit of estimated ``eps_k``-regular sets with ``eps_k = r_k = 2^-k``."""
    omega = as_closed_set(omega)
    x = float(np.ravel(np.asarray(xbar, dtype=float))[0])
    from .regularity import lip_estimate
    lip = lip_estimate(f, omega, x).value
    cap = 10.0 if not math.isfinite(lip) else max(10.0, 2.0 * lip)
    seq, scales, trace = [], [], []
    for k in range(1, levels + 1):
        r = 2.0 ** -k
        acc = IntervalSet.empty()
        for p in limiting_points(f, omega, x, r):
            acc = acc.union(reconstruct_1d(f, omega, p, r, sched, tol, cap, relative=relative).set)
        seq.append((k, acc))
        scales.append(r)
        trace.append(str(acc))
    kind = "limiting_relative" if relative else "limiting_plain"
    try:
        lim = iset_outer_limit(seq, scales, tol_lim)
    except InconclusiveLimit as exc:
        raise EstimationFailure(f"outer limit did not settle: {exc}", {"levels": trace}) from None
    return SubdiffSet(lim, kind, None, (1.0,), ESTIMATED, tol_lim, {"cap": cap, "levels": trace})


def estimate(f, omega, xbar, kind: str, eps: float = 0.0, sched: Schedule = DEFAULT_SCHEDULE) -> SubdiffSet:
    from .subdiff import canonical_kind
    kind = canonical_kind(kind)
    if kind == "eps_regular":
        return reconstruct_1d(f, omega, xbar, eps, sched)
    return limiting_estimate(f, omega, xbar, sched, relative=kind == "limiting_relative")
