"""Command-line entry point: ``relsub run problem.toml`` and single-query shortcuts.

Exit codes: 0 all conclusive and holding, 1 a rule or assertion failed,
2 inconclusive results, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__, problem as pf, report, runner
from .errors import ProblemError, RelsubError


def _point_arg(text: str):
    parts = [p.strip() for p in text.split(",")]
    return parts[0] if len(parts) == 1 else parts


def _schedule_arg(text: str) -> dict:
    """``steps=12,grid_density=32`` or a JSON object."""
    text = text.strip()
    if text.startswith("{"):
        return json.loads(text)
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, val = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"schedule item {item!r} is not key=value")
        out[key.strip()] = json.loads(val)
    return out


def _add_common(p):
    p.add_argument("problem", help="problem file (TOML)")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--csv", metavar="DIR", help="directory for CSV dumps")
    p.add_argument("--threads", type=int, help="worker threads (default: RELSUB_THREADS or CPU count)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="relsub", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"relsub {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("run", help="run every query in the file"))

    p = sub.add_parser("subdiff", help="one subdifferential query")
    _add_common(p)
    p.add_argument("--fn", required=True)
    p.add_argument("--set", required=True)
    p.add_argument("--point", required=True, type=_point_arg)
    p.add_argument("--kind", default="limiting")
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--method", choices=("exact", "estimate"), default="exact")
    p.add_argument("--schedule", type=_schedule_arg)

    p = sub.add_parser("optimality", help="Fermat rule, or the sum rule with --fn2")
    _add_common(p)
    p.add_argument("--fn", required=True)
    p.add_argument("--fn2")
    p.add_argument("--set", required=True)
    p.add_argument("--point", required=True, type=_point_arg)
    p.add_argument("--eps", help="comma-separated eps list for the Fermat rule")
    p.add_argument("--eta", type=float, help="with --fn2: search an approximate certificate")

    p = sub.add_parser("sumrule", help="limiting sum rule, or a fuzzy decomposition with --xstar")
    _add_common(p)
    p.add_argument("--fn", required=True)
    p.add_argument("--fn2", required=True)
    p.add_argument("--set", required=True)
    p.add_argument("--point", required=True, type=_point_arg)
    p.add_argument("--xstar", type=float)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--eta", type=float, default=0.1)

    p = sub.add_parser("meanvalue", help="mean-value witness on [a, b]")
    _add_common(p)
    p.add_argument("--fn", required=True)
    p.add_argument("--a", required=True, type=_point_arg)
    p.add_argument("--b", required=True, type=_point_arg)

    p = sub.add_parser("convexity", help="convexity versus subdifferential monotonicity on [a, b]")
    _add_common(p)
    p.add_argument("--fn", required=True)
    p.add_argument("--a", required=True, type=_point_arg)
    p.add_argument("--b", required=True, type=_point_arg)

    p = sub.add_parser("oracle-compare", help="compare exact subdiff queries with the sampling oracle")
    _add_common(p)
    return ap


def _single_query(args) -> dict:
    c = args.command
    if c == "subdiff":
        q = {"op": "subdiff", "fn": args.fn, "set": args.set, "point": args.point,
             "kind": args.kind, "eps": args.eps, "method": args.method}
        if args.schedule:
            q["schedule"] = args.schedule
    elif c == "optimality":
        base = {"set": args.set, "point": args.point}
        if args.fn2 is None:
            q = {"op": "fermat", "fn": args.fn, **base}
            if args.eps:
                q["eps_list"] = [float(e) for e in args.eps.split(",")]
        elif args.eta is not None:
            q = {"op": "approx_optimality", "f1": args.fn, "f2": args.fn2, **base, "eta": args.eta}
        else:
            q = {"op": "sum_optimality", "f1": args.fn, "f2": args.fn2, **base}
    elif c == "sumrule":
        base = {"f1": args.fn, "f2": args.fn2, "set": args.set, "point": args.point}
        if args.xstar is None:
            q = {"op": "sum_rule", **base}
        else:
            q = {"op": "fuzzy_sum", **base, "xstar": args.xstar, "eps": args.eps, "eta": args.eta}
    elif c == "meanvalue":
        q = {"op": "mean_value", "fn": args.fn, "a": args.a, "b": args.b}
    else:
        q = {"op": "equivalence", "fn": args.fn, "a": args.a, "b": args.b}
    q["id"] = c
    return q


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        problem, resolved, text = pf.load(args.problem)
        if args.command not in ("run", "oracle-compare"):
            q = _single_query(args)
            problem.queries = [q]
            pf.from_mapping({**problem.to_mapping(), "queries": [q]})
            resolved = pf.resolve(problem)
        if args.command == "oracle-compare":
            results = runner.oracle_compare(resolved, args.threads)
            rep = report.build(problem, text, results, mode="oracle-compare")
            gaps = [r["hausdorff"] for r in results if "hausdorff" in r]
            rep["summary"]["max_hausdorff"] = max(gaps) if gaps else 0.0
        else:
            results = runner.run_queries(resolved, args.csv, args.threads)
            rep = report.build(problem, text, results, mode=args.command)
    except ProblemError as exc:
        print(f"relsub: {exc}", file=sys.stderr)
        _emit(report.dumps(report.input_error(str(exc), exc.field, exc.line)), args.out)
        return report.EXIT_INPUT
    except (RelsubError, ValueError) as exc:
        print(f"relsub: {exc}", file=sys.stderr)
        _emit(report.dumps(report.input_error(str(exc))), args.out)
        return report.EXIT_INPUT
    _emit(report.dumps(rep), args.out)
    return rep["summary"]["exit_code"]


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
