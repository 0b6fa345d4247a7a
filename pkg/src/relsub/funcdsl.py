"""Build functions and closed sets from textual or mapping sources.

Function sources::

    "x^3/3"                                   # one piece on the whole space
    [("(-inf,0)", "-inf"), ("{0}", "0")]      # (guard, expr) pairs
    {"pieces": [{"guard": "x > -1", "expr": "1/(x+1) - 1"}], "default": "inf"}

Set sources are interval-set text in one dimension, or mappings with a
``type`` of ``interval``, ``segment``, ``box``, ``polytope`` or ``union``.
"""

from __future__ import annotations

import math

from .errors import DSLSyntaxError
from .expr import parse_constant, parse_expr
from .guards import Everything, parse_guard
from .intervals import IntervalSet, parse_intervalset
from .piecewise import Piece, PiecewiseFunc
from .sets import Box, ClosedSet, FiniteUnion, Interval1D, PolytopeH, Segment

__all__ = ["make_function", "make_set", "parse_value"]


def parse_value(v) -> float:
    """Number or constant text (``"inf"``, ``"-1/2"``) to float."""
    if isinstance(v, bool):
        raise DSLSyntaxError("booleans are not numbers", repr(v))
    if isinstance(v, (int, float)):
        if math.isnan(v):
            raise DSLSyntaxError("NaN is not an extended real", repr(v))
        return float(v)
    if isinstance(v, str):
        return parse_constant(v)
    raise DSLSyntaxError(f"expected a number, got {type(v).__name__}", repr(v))


def _whole(dim):
    return IntervalSet.real_line() if dim == 1 else Everything(dim)


def _piece(item, dim, sets):
    if isinstance(item, dict):
        unknown = set(item) - {"guard", "expr"}
        if unknown or "expr" not in item:
            raise DSLSyntaxError(f"a piece needs 'guard' and 'expr' keys, got {sorted(item)}", repr(item))
        guard_text, expr_text = item.get("guard", "R"), item["expr"]
    else:
        try:
            guard_text, expr_text = item
        except (TypeError, ValueError):
            raise DSLSyntaxError("a piece is a (guard, expr) pair", repr(item)) from None
    if dim > 1 and isinstance(guard_text, str) and guard_text.strip() in ("R", "ℝ"):
        guard = Everything(dim)
    else:
        guard = parse_guard(guard_text, dim, sets)
    expr_src = expr_text if isinstance(expr_text, str) else repr(expr_text)
    return Piece(guard, parse_expr(expr_text, dim), f"{guard_text}: {expr_src}")


def make_function(source, dim: int = 1, sets: dict | None = None, name: str = "f") -> PiecewiseFunc:
    """Parse and validate a piecewise function; ``sets`` resolves named guards."""
    if isinstance(source, PiecewiseFunc):
        return source
    sets = sets or {}
    default = math.inf
    if isinstance(source, str):
        pieces = [Piece(_whole(dim), parse_expr(source, dim), source)]
    elif isinstance(source, dict):
        unknown = set(source) - {"pieces", "expr", "default"}
        if unknown:
            raise DSLSyntaxError(f"unknown function keys: {', '.join(sorted(unknown))}", name)
        if ("pieces" in source) == ("expr" in source):
            raise DSLSyntaxError("give exactly one of 'pieces' or 'expr'", name)
        if "expr" in source:
            pieces = [Piece(_whole(dim), parse_expr(source["expr"], dim), str(source["expr"]))]
        else:
            pieces = [_piece(p, dim, sets) for p in source["pieces"]]
        default = parse_value(source.get("default", math.inf))
    else:
        pieces = [_piece(p, dim, sets) for p in source]
    return PiecewiseFunc(tuple(pieces), default, dim, name)


def make_set(source, dim: int = 1) -> ClosedSet:
    if isinstance(source, ClosedSet):
        return source
    if isinstance(source, str):
        if dim != 1:
            raise DSLSyntaxError(f"set text is one-dimensional; use a mapping in dimension {dim}", source)
        return Interval1D(parse_intervalset(source))
    if not isinstance(source, dict) or "type" not in source:
        raise DSLSyntaxError("a set is interval text or a mapping with a 'type'", repr(source))
    kind = source["type"]
    vec = lambda key: [parse_value(v) for v in source[key]]  # noqa: E731
    try:
        if kind == "interval":
            out = Interval1D(parse_intervalset(source["text"]))
        elif kind == "segment":
            out = Segment(vec("a"), vec("b"))
        elif kind == "box":
            out = Box(vec("lo"), vec("hi"))
        elif kind == "polytope":
            A = [[parse_value(v) for v in row] for row in source["A"]]
            out = PolytopeH(A, vec("b"), bool(source.get("unbounded", False)))
        elif kind == "union":
            out = FiniteUnion(tuple(make_set(m, dim) for m in source["members"]))
        else:
            raise DSLSyntaxError(f"unknown set type {kind!r}", repr(source))
    except KeyError as exc:
        raise DSLSyntaxError(f"set of type {kind!r} is missing {exc.args[0]!r}", repr(source)) from None
    except ValueError as exc:
        if isinstance(exc, DSLSyntaxError):
            raise
        raise DSLSyntaxError(str(exc), repr(source)) from None
    if out.dim != dim:
        raise DSLSyntaxError(f"set has dimension {out.dim}, expected {dim}", repr(source))
    return out
