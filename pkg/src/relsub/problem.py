"""Problem files: TOML documents naming sets, functions and queries.

Example::

    version = 1
    seed = 0

    [space]
    dim = 1

    [sets]
    Omega = "(-inf, 0]"

    [functions.f]
    expr = "-abs(x)"

    [[queries]]
    op = "subdiff"
    fn = "f"
    set = "Omega"
    point = 0
    kind = "limiting"
    expect = "{1}"
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - depends on the interpreter
    import tomli as tomllib

from .errors import DSLSyntaxError, ProblemError, RelsubError
from .estimator import Schedule
from .funcdsl import make_function, make_set, parse_value

COMMON = {"op", "id", "expect", "reference", "note", "schedule", "tol"}

# op -> (required arguments, optional arguments with defaults)
OPS = {
    "subdiff": (("fn", "set", "point"), {"kind": "limiting", "eps": 0.0, "method": "exact"}),
    "fermat": (("fn", "set", "point"), {"eps_list": [0.0, 0.1, 1.0]}),
    "sum_optimality": (("f1", "f2", "set", "point"), {}),
    "approx_optimality": (("f1", "f2", "set", "point", "eta"), {}),
    "sum_rule": (("f1", "f2", "set", "point"), {}),
    "fuzzy_sum": (("f1", "f2", "set", "point", "xstar", "eta"), {"eps": 0.0}),
    "scalar_rule": (("fn", "set", "point", "lambda"), {"eps": 0.0}),
    "lipschitz_bound": (("fn", "set", "point"), {"eps": 0.0, "radius": 0.5}),
    "inclusion_chain": (("fn", "set", "point"), {}),
    "mean_value": (("fn", "a", "b"), {}),
    "convexity": (("fn", "a", "b"), {}),
    "monotonicity": (("fn", "a", "b"), {"kind": "limiting"}),
    "equivalence": (("fn", "a", "b"), {}),
    "local_min": (("fn", "set"), {}),
    "lipschitz": (("fn", "set", "point"), {}),
    "lsc": (("fn", "set", "point"), {}),
}
FN_KEYS = ("fn", "f1", "f2")
KINDS = {"regular", "eps_regular", "limiting", "limiting_relative", "plain", "limiting_plain"}


@dataclass
class ProblemFile:
    version: int = 1
    dim: int = 1
    seed: int = 0
    schedule: dict = field(default_factory=dict)
    sets: dict = field(default_factory=dict)
    functions: dict = field(default_factory=dict)
    queries: list = field(default_factory=list)

    def to_mapping(self) -> dict:
        out = {"version": self.version, "seed": self.seed, "space": {"dim": self.dim}}
        if self.schedule:
            out["schedule"] = dict(self.schedule)
        out["sets"] = dict(self.sets)
        out["functions"] = dict(self.functions)
        out["queries"] = [dict(q) for q in self.queries]
        return out

    def dumps(self) -> str:
        return tomli_w.dumps(self.to_mapping())

    def base_schedule(self) -> Schedule:
        return Schedule.from_mapping({**self.schedule, "seed": self.seed})

    def query_schedule(self, q: dict) -> Schedule:
        return Schedule.from_mapping({**self.schedule, "seed": self.seed, **q.get("schedule", {})})


@dataclass
class Resolved:
    problem: ProblemFile
    sets: dict
    functions: dict


def _line_of(text: str | None, *needles) -> int | None:
    if not text:
        return None
    for needle in needles:
        if not needle:
            continue
        pat = re.compile(rf"^\s*(\[\s*)?{re.escape(needle)}\b", re.M)
        m = pat.search(text)
        if m:
            return text.count("\n", 0, m.start()) + 1
    return None


def _query_line(text: str | None, index: int) -> int | None:
    if not text:
        return None
    hits = [m.start() for m in re.finditer(r"^\s*\[\[\s*queries\s*\]\]", text, re.M)]
    if index < len(hits):
        return text.count("\n", 0, hits[index]) + 1
    return None


def _number(v, where, line):
    try:
        return parse_value(v)
    except DSLSyntaxError as exc:
        raise ProblemError(str(exc), where, line) from None


def from_mapping(data: dict, text: str | None = None) -> ProblemFile:
    """Validate the raw document shape (names are resolved by :func:`resolve`)."""
    allowed = {"version", "seed", "space", "schedule", "sets", "functions", "queries"}
    extra = set(data) - allowed
    if extra:
        key = sorted(extra)[0]
        raise ProblemError(f"unknown top-level key {key!r}", key, _line_of(text, key))
    if data.get("version") != 1:
        raise ProblemError("version must be 1", "version", _line_of(text, "version"))
    space = data.get("space", {"dim": 1})
    dim = space.get("dim") if isinstance(space, dict) else None
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ProblemError("space.dim must be a positive integer", "space.dim", _line_of(text, "dim"))
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ProblemError("seed must be an integer", "seed", _line_of(text, "seed"))
    for key in ("schedule", "sets", "functions"):
        if not isinstance(data.get(key, {}), dict):
            raise ProblemError(f"{key} must be a table", key, _line_of(text, key))
    queries = data.get("queries", [])
    if not isinstance(queries, list):
        raise ProblemError("queries must be an array of tables", "queries", _line_of(text, "queries"))
    for i, q in enumerate(queries):
        _check_query(q, i, text)
    return ProblemFile(1, dim, seed, dict(data.get("schedule", {})), dict(data.get("sets", {})),
                       dict(data.get("functions", {})), [dict(q) for q in queries])


def _check_query(q, i, text):
    where = f"queries[{i}]"
    line = _query_line(text, i)
    if not isinstance(q, dict) or "op" not in q:
        raise ProblemError("each query needs an 'op'", where, line)
    op = q["op"]
    if op not in OPS:
        raise ProblemError(f"unknown op {op!r}; expected one of {', '.join(sorted(OPS))}",
                           f"{where}.op", line)
    required, optional = OPS[op]
    missing = [k for k in required if k not in q]
    if missing:
        raise ProblemError(f"op {op!r} needs {', '.join(missing)}", where, line)
    extra = set(q) - set(required) - set(optional) - COMMON
    if extra:
        raise ProblemError(f"unexpected key {sorted(extra)[0]!r} for op {op!r}", where, line)
    if "kind" in q and op == "subdiff" and q["kind"] not in KINDS:
        raise ProblemError(f"unknown kind {q['kind']!r}", f"{where}.kind", line)
    if "kind" in q and op == "monotonicity" and q["kind"] not in ("plain", "limiting"):
        raise ProblemError("monotonicity kind is 'plain' or 'limiting'", f"{where}.kind", line)
    if q.get("method", "exact") not in ("exact", "estimate"):
        raise ProblemError("method is 'exact' or 'estimate'", f"{where}.method", line)
    if "schedule" in q and not isinstance(q["schedule"], dict):
        raise ProblemError("schedule must be a table", f"{where}.schedule", line)
    for key in ("eps", "eta", "lambda", "xstar", "radius", "tol"):
        if key in q:
            _number(q[key], f"{where}.{key}", line)


def resolve(problem: ProblemFile, text: str | None = None) -> Resolved:
    """Build every set and function and check that query names resolve."""
    try:
        problem.base_schedule()
    except (TypeError, ValueError) as exc:
        raise ProblemError(str(exc), "schedule", _line_of(text, "schedule")) from None
    sets = {}
    for name, src in problem.sets.items():
        try:
            sets[name] = make_set(src, problem.dim)
        except RelsubError as exc:
            raise ProblemError(str(exc), f"sets.{name}", _line_of(text, name)) from None
    functions = {}
    for name, src in problem.functions.items():
        try:
            functions[name] = make_function(src, problem.dim, sets, name)
        except (RelsubError, ValueError) as exc:
            raise ProblemError(str(exc), f"functions.{name}",
                               _line_of(text, f"functions.{name}", name)) from None
    for i, q in enumerate(problem.queries):
        where, line = f"queries[{i}]", _query_line(text, i)
        for key in FN_KEYS:
            if key in q and q[key] not in functions:
                raise ProblemError(f"unknown function {q[key]!r}", f"{where}.{key}", line)
        if "set" in q and q["set"] not in sets:
            raise ProblemError(f"unknown set {q['set']!r}", f"{where}.set", line)
        try:
            problem.query_schedule(q)
        except (TypeError, ValueError) as exc:
            raise ProblemError(str(exc), f"{where}.schedule", line) from None
    return Resolved(problem, sets, functions)


def loads(text: str) -> ProblemFile:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ProblemError(f"invalid TOML: {exc}", None, int(m.group(1)) if m else None) from None
    return from_mapping(data, text)


def load(path) -> tuple:
    """``(ProblemFile, Resolved, text)`` for a file on disk."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ProblemError(f"cannot read problem file: {exc.strerror}", str(path)) from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise ProblemError("problem file is not UTF-8", str(path)) from None
    problem = loads(text)
    return problem, resolve(problem, text), text
