"""JSON reports with a fixed field order and no floating-point surprises."""

from __future__ import annotations

import hashlib
import json
import math
from enum import Enum

import numpy as np

from .extreal import fmt
from .intervals import IntervalSet

REPORT_FORMAT = "relsub-report/1"

EXIT_OK, EXIT_FAILED, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 1, 2, 3


def plain(v):
    """JSON-safe copy: non-finite floats become ``"inf"``/``"-inf"``, arrays become lists."""
    if isinstance(v, dict):
        return {str(k): plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return [plain(x) for x in v.tolist()]
    if isinstance(v, Enum):
        return v.value
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return v if math.isfinite(v) else fmt(v)
    if isinstance(v, IntervalSet):
        return str(v)
    if hasattr(v, "to_json"):
        return plain(v.to_json())
    if v is None or isinstance(v, str):
        return v
    return str(v)


def exit_code(statuses) -> int:
    statuses = list(statuses)
    if "error" in statuses:
        return EXIT_INPUT
    if "failed" in statuses:
        return EXIT_FAILED
    if "inconclusive" in statuses:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def build(problem, text: str, results: list, mode: str = "run") -> dict:
    counts = {s: 0 for s in ("ok", "failed", "inconclusive", "error")}
    for r in results:
        counts[r["status"]] += 1
    return {
        "format": REPORT_FORMAT,
        "mode": mode,
        "problem_sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
        "seed": problem.seed,
        "schedule": problem.base_schedule().to_json(),
        "queries": results,
        "summary": {**counts, "exit_code": exit_code(r["status"] for r in results)},
    }


def input_error(message: str, field=None, line=None) -> dict:
    return {"format": REPORT_FORMAT, "mode": "error",
            "error": {"message": message, "field": field, "line": line},
            "summary": {"exit_code": EXIT_INPUT}}


def dumps(report: dict) -> str:
    return json.dumps(plain(report), indent=2, ensure_ascii=False, allow_nan=False) + "\n"
