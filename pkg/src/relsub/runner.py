"""Query execution with a bounded thread pool; results keep query order."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis, calculus, estimator, regularity
from .errors import (DomainError, EstimationFailure, InconclusiveLimit, IsolatedEpigraphPoint,
                     SearchFailure, SplitRequired)
from .funcdsl import parse_value
from .intervals import hausdorff, parse_intervalset
from .problem import OPS, Resolved
from .sets import Segment
from .subdiff import canonical_kind, segment_subdiff, subdiff

OK, FAILED, INCONCLUSIVE, ERROR = "ok", "failed", "inconclusive", "error"
ORACLE_GAP = 1e-3

DISCREPANCY_NOTE = ("computed from the definition; differs from the stated reference value "
                    "(reported, not asserted)")


def thread_count(n_jobs: int) -> int:
    raw = os.environ.get("RELSUB_THREADS", "")
    try:
        cap = int(raw) if raw else (os.cpu_count() or 1)
    except ValueError:
        cap = 1
    return max(1, min(cap, n_jobs))


def _point(v, dim):
    if isinstance(v, (list, tuple)):
        vals = [parse_value(x) for x in v]
    else:
        vals = [parse_value(v)]
    if len(vals) != dim:
        raise DomainError(f"point {v!r} has {len(vals)} coordinates, expected {dim}")
    return vals[0] if dim == 1 else np.array(vals)


def _sd(f, omega, x, kind, eps):
    if isinstance(omega, Segment):
        return segment_subdiff(f, omega.a, omega.b, x, kind, eps)
    return subdiff(f, omega, x, kind, eps)


def _set_matches(computed, expected_text, exact, tol):
    exp = parse_intervalset(expected_text)
    if exact:
        return calculus.sets_close(computed, exp, 0.0) or computed == exp
    return (hausdorff(computed, exp) <= tol and computed.left_unbounded == exp.left_unbounded
            and computed.right_unbounded == exp.right_unbounded)


class Context:
    def __init__(self, resolved: Resolved, csv_dir=None):
        self.r = resolved
        self.p = resolved.problem
        self.csv_dir = Path(csv_dir) if csv_dir else None

    def fn(self, q, key="fn"):
        return self.r.functions[q[key]]

    def omega(self, q):
        return self.r.sets[q["set"]]

    def point(self, q, key="point"):
        return _point(q[key], self.p.dim)

    def csv_path(self, qid, suffix):
        if self.csv_dir is None:
            return None
        self.csv_dir.mkdir(parents=True, exist_ok=True)
        return self.csv_dir / f"{qid}{suffix}.csv"


def _verdict_status(verdict: str, q: dict, natural: dict) -> str:
    if "expect" in q:
        return OK if str(q["expect"]) == verdict else FAILED
    return natural.get(verdict, OK)


def run_subdiff(ctx, q, qid):
    f, omega, x = ctx.fn(q), ctx.omega(q), ctx.point(q)
    kind = canonical_kind(q.get("kind", "limiting"))
    eps = parse_value(q.get("eps", 0.0))
    out = {"provenance": {"method": "exact"}}
    if q.get("method", "exact") == "estimate":
        sched = ctx.p.query_schedule(q)
        if kind == "eps_regular":
            res = estimator.reconstruct_1d(f, omega, x, eps, sched, csv_path=ctx.csv_path(qid, ""))
        else:
            res = estimator.limiting_estimate(f, omega, x, sched, relative=kind == "limiting_relative")
        out["provenance"] = {"method": "estimated", "schedule": sched.to_json(), "seed": sched.seed}
    else:
        res = _sd(f, omega, x, kind, eps)
    out["result"] = res.to_json()
    status = OK
    exact = out["provenance"]["method"] == "exact"
    tol = parse_value(q.get("tol", 0.0 if exact else ORACLE_GAP))
    if "expect" in q and not _set_matches(res.set, q["expect"], exact and tol == 0.0, tol):
        status = FAILED
        out["counterexample"] = {"expected": q["expect"], "computed": str(res.set)}
    if "reference" in q and not _set_matches(res.set, q["reference"], exact and tol == 0.0, tol):
        out["discrepancy"] = {"reference": q["reference"], "computed": str(res.set),
                              "note": DISCREPANCY_NOTE}
    return status, out


def run_rule(ctx, q, qid):
    op = q["op"]
    x = ctx.point(q) if "point" in q else None
    if op == "sum_rule":
        rep = calculus.sum_rule_check(ctx.fn(q, "f1"), ctx.fn(q, "f2"), ctx.omega(q), x)
    elif op == "scalar_rule":
        rep = calculus.scalar_rule_check(ctx.fn(q), ctx.omega(q), x, parse_value(q["lambda"]),
                                         parse_value(q.get("eps", 0.0)))
    elif op == "lipschitz_bound":
        rep = calculus.lipschitz_bound_check(ctx.fn(q), ctx.omega(q), x, parse_value(q.get("eps", 0.0)),
                                             parse_value(q.get("radius", 0.5)))
    elif op == "inclusion_chain":
        rep = calculus.inclusion_chain_check(ctx.fn(q), ctx.omega(q), x)
    else:
        rep = analysis.equivalence_report(ctx.fn(q), ctx.point(q, "a"), ctx.point(q, "b"))
    status = _verdict_status(rep.verdict, q, {calculus.FAILS: FAILED, calculus.INCONCLUSIVE: INCONCLUSIVE})
    return status, {"result": rep.to_json()}


def run_optimality(ctx, q, qid):
    op = q["op"]
    x = ctx.point(q)
    if op == "fermat":
        eps_list = [parse_value(e) for e in q.get("eps_list", [0.0, 0.1, 1.0])]
        v = analysis.fermat_check(ctx.fn(q), ctx.omega(q), x, eps_list)
    else:
        v = analysis.sum_optimality_check(ctx.fn(q, "f1"), ctx.fn(q, "f2"), ctx.omega(q), x)
    status = _verdict_status(v.verdict, q, {analysis.VIOLATED: FAILED, calculus.INCONCLUSIVE: INCONCLUSIVE})
    return status, {"result": v.to_json()}


def run_certificate(ctx, q, qid):
    f1, f2, omega, x = ctx.fn(q, "f1"), ctx.fn(q, "f2"), ctx.omega(q), ctx.point(q)
    eta = parse_value(q["eta"])
    try:
        if q["op"] == "approx_optimality":
            cert = analysis.approx_optimality_search(f1, f2, omega, x, eta)
        else:
            cert = calculus.fuzzy_sum_search(f1, f2, omega, x, parse_value(q["xstar"]),
                                             parse_value(q.get("eps", 0.0)), eta)
    except SearchFailure as exc:
        return FAILED, {"result": None, "counterexample": {"message": str(exc),
                                                          "diagnostics": exc.diagnostics}}
    if cert is None:
        return INCONCLUSIVE, {"result": None, "message": "every candidate set was empty"}
    return OK, {"result": cert.to_json()}


def run_mean_value(ctx, q, qid):
    f, a, b = ctx.fn(q), ctx.point(q, "a"), ctx.point(q, "b")
    tol = parse_value(q.get("tol", 1e-6))
    try:
        w = analysis.mean_value_witness(f, a, b, trace_csv=ctx.csv_path(qid, "_trace"))
    except SearchFailure as exc:
        return FAILED, {"result": None, "counterexample": {"message": str(exc),
                                                          "diagnostics": exc.diagnostics}}
    ok = w.inequality_residual >= -tol and w.scaled_residual >= -tol
    if w.equality_case:
        ok = ok and w.equality_residual <= tol
    return (OK if ok else FAILED), {"result": w.to_json()}


def run_trit(ctx, q, qid):
    op = q["op"]
    if op == "convexity":
        t = analysis.convexity_check(ctx.fn(q), ctx.point(q, "a"), ctx.point(q, "b"))
    elif op == "monotonicity":
        t = analysis.monotonicity_check(q.get("kind", "limiting"), ctx.fn(q), ctx.point(q, "a"),
                                        ctx.point(q, "b"))
    else:
        t = regularity.check_lsc_relative(ctx.fn(q), ctx.omega(q), ctx.point(q))
        around = regularity.check_lsc_around(ctx.fn(q), ctx.omega(q), ctx.point(q))
        res = {"at": t.to_json(), "around": around.to_json()}
        status = _verdict_status(f"{t.verdict.value}/{around.verdict.value}", q, {})
        if "unknown" in (t.verdict.value, around.verdict.value) and "expect" not in q:
            status = INCONCLUSIVE
        return status, {"result": res}
    status = _verdict_status(t.verdict.value, q, {"unknown": INCONCLUSIVE})
    return status, {"result": t.to_json()}


def run_misc(ctx, q, qid):
    f, omega = ctx.fn(q), ctx.omega(q)
    if q["op"] == "local_min":
        found = analysis.local_min_scan(f, omega)
        return OK, {"result": [c.to_json() for c in found]}
    est = regularity.lip_estimate(f, omega, ctx.point(q))
    status = OK
    if "expect" in q:
        status = OK if str(q["expect"]) == ("finite" if est.finite else "inf") else FAILED
    return status, {"result": est.to_json()}


HANDLERS = {
    "subdiff": run_subdiff,
    "fermat": run_optimality, "sum_optimality": run_optimality,
    "approx_optimality": run_certificate, "fuzzy_sum": run_certificate,
    "sum_rule": run_rule, "scalar_rule": run_rule, "lipschitz_bound": run_rule,
    "inclusion_chain": run_rule, "equivalence": run_rule,
    "mean_value": run_mean_value,
    "convexity": run_trit, "monotonicity": run_trit, "lsc": run_trit,
    "local_min": run_misc, "lipschitz": run_misc,
}
assert set(HANDLERS) == set(OPS)


def query_id(q: dict, i: int) -> str:
    return str(q.get("id", f"q{i}"))


def execute(ctx: Context, q: dict, i: int) -> dict:
    qid = query_id(q, i)
    try:
        status, body = HANDLERS[q["op"]](ctx, q, qid)
    except (DomainError, SplitRequired) as exc:
        status, body = ERROR, {"result": None, "error": str(exc)}
    except (EstimationFailure, InconclusiveLimit, IsolatedEpigraphPoint) as exc:
        diag = getattr(exc, "diagnostics", None)
        status, body = INCONCLUSIVE, {"result": None, "error": str(exc)}
        if diag:
            body["diagnostics"] = diag
    except ValueError as exc:
        status, body = ERROR, {"result": None, "error": str(exc)}
    return {"id": qid, "op": q["op"], "inputs": q, "status": status, **body}


def run_queries(resolved: Resolved, csv_dir=None, threads: int | None = None) -> list:
    ctx = Context(resolved, csv_dir)
    qs = resolved.problem.queries
    n = threads or thread_count(len(qs))
    if n <= 1 or len(qs) <= 1:
        return [execute(ctx, q, i) for i, q in enumerate(qs)]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(lambda iq: execute(ctx, iq[1], iq[0]), enumerate(qs)))


def oracle_compare(resolved: Resolved, threads: int | None = None) -> list:
    """Re-run each exact 1-D ``subdiff`` query through the sampling oracle."""
    ctx = Context(resolved)
    jobs = [(i, q) for i, q in enumerate(resolved.problem.queries)
            if q["op"] == "subdiff" and q.get("method", "exact") == "exact"
            and resolved.problem.dim == 1]

    def one(job):
        i, q = job
        qid = query_id(q, i)
        f, omega, x = ctx.fn(q), ctx.omega(q), ctx.point(q)
        kind = canonical_kind(q.get("kind", "limiting"))
        eps = parse_value(q.get("eps", 0.0))
        sched = resolved.problem.query_schedule(q)
        try:
            exact = subdiff(f, omega, x, kind, eps).set
            est = estimator.estimate(f, omega, x, kind, eps, sched).set
        except (DomainError, SplitRequired, ValueError) as exc:
            return {"id": qid, "status": ERROR, "error": str(exc)}
        except (EstimationFailure, InconclusiveLimit, IsolatedEpigraphPoint) as exc:
            return {"id": qid, "status": INCONCLUSIVE, "error": str(exc)}
        gap = hausdorff(exact, est)
        flags = (exact.left_unbounded == est.left_unbounded
                 and exact.right_unbounded == est.right_unbounded)
        ok = math.isfinite(gap) and gap <= ORACLE_GAP and flags
        return {"id": qid, "status": OK if ok else FAILED, "kind": kind, "eps": eps,
                "exact": str(exact), "estimated": str(est), "hausdorff": gap,
                "unbounded_flags_agree": flags, "schedule": sched.to_json()}

    n = threads or thread_count(len(jobs))
    if n <= 1:
        return [one(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(one, jobs))
