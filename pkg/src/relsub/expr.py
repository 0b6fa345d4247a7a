"""Expression trees for piece formulas.

The grammar is deliberately small: constants (possibly infinite),
variables, ``+ - * /``, nonnegative integer powers, ``exp`` and ``abs``.
Text is parsed with the standard :mod:`ast` module; ``^`` is accepted as a
power operator.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import DSLSyntaxError, EvaluationError, SplitRequired
from .extreal import INF, NEG_INF, ext_add_array, ext_mul_array, fmt

VAR_NAMES = ("x", "y", "z")


class Expr:
    """Base node. Subclasses are frozen dataclasses and hashable."""

    __slots__ = ()

    def __call__(self, *coords):
        X = np.atleast_2d(np.asarray(coords, dtype=float))
        return float(evaluate(self, X)[0])

    def __str__(self):
        return to_str(self)


@dataclass(frozen=True)
class Const(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    index: int = 0


@dataclass(frozen=True)
class Add(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Sub(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Mul(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Div(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class PowInt(Expr):
    base: Expr
    k: int


@dataclass(frozen=True)
class Exp(Expr):
    arg: Expr


@dataclass(frozen=True)
class Abs(Expr):
    arg: Expr


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


ZERO = Const(0.0)
ONE = Const(1.0)


def _const(e, value=None):
    return isinstance(e, Const) and (value is None or e.value == value)


# -- simplifying constructors -------------------------------------------------

def add(a, b):
    if _const(a, 0.0):
        return b
    if _const(b, 0.0):
        return a
    if _const(a) and _const(b):
        return Const(float(ext_add_array(a.value, b.value)))
    return Add(a, b)


def sub(a, b):
    if _const(b, 0.0):
        return a
    if _const(a, 0.0):
        return neg(b)
    if _const(a) and _const(b):
        return Const(float(ext_add_array(a.value, -b.value)))
    return Sub(a, b)


def mul(a, b):
    if _const(a, 0.0) or _const(b, 0.0):
        return ZERO
    if _const(a, 1.0):
        return b
    if _const(b, 1.0):
        return a
    if _const(a, -1.0):
        return neg(b)
    if _const(b, -1.0):
        return neg(a)
    if _const(a) and _const(b):
        return Const(a.value * b.value)
    return Mul(a, b)


def div(a, b):
    if _const(b, 1.0):
        return a
    if _const(a, 0.0) and not _const(b, 0.0):
        return ZERO
    return Div(a, b)


def neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def powi(a, k):
    if k == 0:
        return ONE
    if k == 1:
        return a
    return PowInt(a, k)


# -- evaluation ---------------------------------------------------------------

def _check(values, what):
    if np.isnan(values).any():
        raise EvaluationError(f"{what} produced an undefined value")
    return values


def evaluate(e: Expr, X) -> np.ndarray:
    """Evaluate on the rows of ``X`` (shape ``(N, dim)``)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    return _eval(e, X, n)


def _eval(e, X, n):
    if isinstance(e, Const):
        return np.full(n, e.value)
    if isinstance(e, Var):
        if e.index >= X.shape[1]:
            raise EvaluationError(f"variable index {e.index} exceeds dimension {X.shape[1]}")
        return X[:, e.index].copy()
    if isinstance(e, Add):
        return _check(ext_add_array(_eval(e.a, X, n), _eval(e.b, X, n)), "addition")
    if isinstance(e, Sub):
        return _check(ext_add_array(_eval(e.a, X, n), -_eval(e.b, X, n)), "subtraction")
    if isinstance(e, Mul):
        return _check(ext_mul_array(_eval(e.a, X, n), _eval(e.b, X, n)), "product")
    if isinstance(e, Div):
        num = _eval(e.a, X, n)
        den = _eval(e.b, X, n)
        if (den == 0.0).any():
            raise EvaluationError(f"division by zero in {to_str(e)}")
        with np.errstate(invalid="ignore", over="ignore"):
            return _check(num / den, "division")
    if isinstance(e, PowInt):
        base = _eval(e.base, X, n)
        with np.errstate(over="ignore"):
            return _check(np.power(base, e.k), "power")
    if isinstance(e, Exp):
        with np.errstate(over="ignore"):
            return _check(np.exp(_eval(e.arg, X, n)), "exp")
    if isinstance(e, Abs):
        return np.abs(_eval(e.arg, X, n))
    if isinstance(e, Neg):
        return -_eval(e.arg, X, n)
    raise TypeError(f"unknown expression node {type(e).__name__}")


# -- structure ----------------------------------------------------------------

def children(e):
    if isinstance(e, (Add, Sub, Mul, Div)):
        return (e.a, e.b)
    if isinstance(e, PowInt):
        return (e.base,)
    if isinstance(e, (Exp, Abs, Neg)):
        return (e.arg,)
    return ()


def walk(e):
    yield e
    for c in children(e):
        yield from walk(c)


def max_var(e) -> int:
    return max((n.index for n in walk(e) if isinstance(n, Var)), default=-1)


def is_constant(e) -> bool:
    return max_var(e) < 0


def abs_arguments(e):
    return [n.arg for n in walk(e) if isinstance(n, Abs)]


def denominators(e):
    return [n.b for n in walk(e) if isinstance(n, Div)]


def substitute(e, mapping: dict):
    """Replace ``Var(i)`` by ``mapping[i]`` where present."""
    if isinstance(e, Var):
        return mapping.get(e.index, e)
    if isinstance(e, Const):
        return e
    if isinstance(e, Add):
        return add(substitute(e.a, mapping), substitute(e.b, mapping))
    if isinstance(e, Sub):
        return sub(substitute(e.a, mapping), substitute(e.b, mapping))
    if isinstance(e, Mul):
        return mul(substitute(e.a, mapping), substitute(e.b, mapping))
    if isinstance(e, Div):
        return div(substitute(e.a, mapping), substitute(e.b, mapping))
    if isinstance(e, PowInt):
        return powi(substitute(e.base, mapping), e.k)
    if isinstance(e, Exp):
        return Exp(substitute(e.arg, mapping))
    if isinstance(e, Abs):
        return Abs(substitute(e.arg, mapping))
    if isinstance(e, Neg):
        return neg(substitute(e.arg, mapping))
    raise TypeError(type(e).__name__)


# -- differentiation ----------------------------------------------------------

def derivative(e: Expr, var: int = 0, sign_of: Callable[[Expr], float] | None = None) -> Expr:
    """Symbolic partial derivative in ``Var(var)``.

    ``abs`` nodes need the sign of their argument on the region of
    interest; ``sign_of(arg)`` supplies it. Without it, any ``abs`` of a
    non-constant argument raises :class:`SplitRequired` at ``nan``.
    """
    d = lambda u: derivative(u, var, sign_of)  # noqa: E731
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.index == var else ZERO
    if isinstance(e, Add):
        return add(d(e.a), d(e.b))
    if isinstance(e, Sub):
        return sub(d(e.a), d(e.b))
    if isinstance(e, Mul):
        if _const(e.a):
            return mul(e.a, d(e.b))
        if _const(e.b):
            return mul(d(e.a), e.b)
        return add(mul(d(e.a), e.b), mul(e.a, d(e.b)))
    if isinstance(e, Div):
        if _const(e.b):
            return div(d(e.a), e.b)
        num = sub(mul(d(e.a), e.b), mul(e.a, d(e.b)))
        return div(num, powi(e.b, 2))
    if isinstance(e, PowInt):
        if e.k == 0:
            return ZERO
        inner = d(e.base)
        return mul(mul(Const(float(e.k)), powi(e.base, e.k - 1)), inner)
    if isinstance(e, Exp):
        return mul(e, d(e.arg))
    if isinstance(e, Neg):
        return neg(d(e.arg))
    if isinstance(e, Abs):
        inner = d(e.arg)
        if _const(inner, 0.0):
            return ZERO
        if sign_of is None:
            raise SplitRequired(math.nan)
        s = sign_of(e.arg)
        if s == 0:
            return ZERO
        return inner if s > 0 else neg(inner)
    raise TypeError(type(e).__name__)


# -- printing -----------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, PowInt: 4}


def to_str(e, var_names=VAR_NAMES) -> str:
    def prec(n):
        if isinstance(n, Const) and n.value < 0:
            return 3
        return _PREC.get(type(n), 5)

    def wrap(n, level, strict=False):
        s = to_str(n, var_names)
        p = prec(n)
        return f"({s})" if (p < level or (strict and p == level)) else s

    if isinstance(e, Const):
        return fmt(e.value)
    if isinstance(e, Var):
        return var_names[e.index] if e.index < len(var_names) else f"x{e.index}"
    if isinstance(e, Add):
        return f"{wrap(e.a, 1)} + {wrap(e.b, 1)}"
    if isinstance(e, Sub):
        return f"{wrap(e.a, 1)} - {wrap(e.b, 1, strict=True)}"
    if isinstance(e, Mul):
        return f"{wrap(e.a, 2)}*{wrap(e.b, 2, strict=True)}"
    if isinstance(e, Div):
        return f"{wrap(e.a, 2)}/{wrap(e.b, 2, strict=True)}"
    if isinstance(e, PowInt):
        return f"{wrap(e.base, 5)}^{e.k}"
    if isinstance(e, Neg):
        return f"-{wrap(e.arg, 3, strict=True)}"
    if isinstance(e, Exp):
        return f"exp({to_str(e.arg, var_names)})"
    if isinstance(e, Abs):
        return f"abs({to_str(e.arg, var_names)})"
    raise TypeError(type(e).__name__)


# -- parsing ------------------------------------------------------------------

def parse_expr(text: str, dim: int = 1) -> Expr:
    """Parse formula text such as ``"1/(x+1) - 1"`` or ``"x^3/3"``."""
    if not isinstance(text, str):
        if isinstance(text, (int, float)):
            return Const(float(text))
        raise DSLSyntaxError("expression must be text", repr(text))
    src = text.strip()
    if not src:
        raise DSLSyntaxError("empty expression", text)
    try:
        tree = ast.parse(src.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise DSLSyntaxError("malformed expression", text, exc.offset) from None
    return _convert(tree.body, text, dim)


def _convert(node, text, dim):
    col = getattr(node, "col_offset", None)
    col = col + 1 if col is not None else None
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise DSLSyntaxError("only numeric literals are allowed", text, col)
        return Const(float(node.value))
    if isinstance(node, ast.Name):
        if node.id in ("inf", "oo"):
            return Const(INF)
        if node.id in VAR_NAMES[:dim]:
            return Var(VAR_NAMES.index(node.id))
        raise DSLSyntaxError(f"unknown name {node.id!r}", text, col)
    if isinstance(node, ast.UnaryOp):
        inner = _convert(node.operand, text, dim)
        if isinstance(node.op, ast.USub):
            return neg(inner)
        if isinstance(node.op, ast.UAdd):
            return inner
        raise DSLSyntaxError("unsupported unary operator", text, col)
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            base = _convert(node.left, text, dim)
            return PowInt(base, _int_exponent(node.right, text))
        a = _convert(node.left, text, dim)
        b = _convert(node.right, text, dim)
        op = type(node.op)
        if op is ast.Add:
            return Add(a, b)
        if op is ast.Sub:
            return Sub(a, b)
        if op is ast.Mult:
            return Mul(a, b)
        if op is ast.Div:
            return Div(a, b)
        raise DSLSyntaxError("unsupported operator", text, col)
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.keywords:
            raise DSLSyntaxError("unsupported call", text, col)
        name = node.func.id
        args = node.args
        if name in ("abs", "exp"):
            if len(args) != 1:
                raise DSLSyntaxError(f"{name} takes one argument", text, col)
            inner = _convert(args[0], text, dim)
            return Abs(inner) if name == "abs" else Exp(inner)
        if name == "pow":
            if len(args) != 2:
                raise DSLSyntaxError("pow takes two arguments", text, col)
            return PowInt(_convert(args[0], text, dim), _int_exponent(args[1], text))
        raise DSLSyntaxError(f"unknown function {name!r}", text, col)
    raise DSLSyntaxError(f"unsupported syntax {type(node).__name__}", text, col)


def _int_exponent(node, text):
    col = getattr(node, "col_offset", 0) + 1
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        v = node.value
        if float(v).is_integer() and v >= 0:
            return int(v)
    raise DSLSyntaxError("exponent must be a nonnegative integer literal", text, col)


def parse_constant(text: str, context: str | None = None) -> float:
    """Evaluate a variable-free formula such as ``-1/2`` or ``-inf``."""
    try:
        e = parse_expr(text, dim=0)
        return float(evaluate(e, np.zeros((1, 0)))[0])
    except (DSLSyntaxError, EvaluationError) as exc:
        raise DSLSyntaxError(f"bad constant {text!r}: {exc}", context or text) from None


# -- scalar helpers -----------------------------------------------------------

def eval_scalar(e: Expr, x: float) -> float:
    return float(evaluate(e, np.array([[x]]))[0])


def try_eval(e: Expr, x: float) -> float:
    """Scalar evaluation returning NaN instead of raising."""
    try:
        return eval_scalar(e, x)
    except EvaluationError:
        return math.nan


def probe_points(lo: float, hi: float, n: int = 801) -> np.ndarray:
    """Sorted sample abscissae strictly inside ``(lo, hi)``; unbounded ends are stretched."""
    t = (np.arange(n) + 0.5) / n
    if math.isfinite(lo) and math.isfinite(hi):
        return lo + (hi - lo) * t
    if math.isfinite(lo):
        return lo + t / (1.0 - t) * max(1.0, abs(lo))
    if math.isfinite(hi):
        return hi - (1.0 - t)[::-1] / t[::-1] * max(1.0, abs(hi))
    s = np.linspace(-12.0, 12.0, n)
    return np.sinh(s)


def sign_changes(e: Expr, lo: float, hi: float, n: int = 801) -> list:
    """Points strictly inside ``(lo, hi)`` where the 1-D expression changes sign."""
    xs = probe_points(lo, hi, n)
    vals = np.array([try_eval(e, x) for x in xs])
    out = []
    for i in range(len(xs) - 1):
        a, b = vals[i], vals[i + 1]
        if math.isnan(a) or math.isnan(b):
            continue
        if a == 0.0:
            prev = vals[i - 1] if i > 0 else math.nan
            if not math.isnan(prev) and prev * b < 0:
                out.append(float(xs[i]))
            continue
        if a * b < 0:
            try:
                z = brentq(lambda x: eval_scalar(e, x), xs[i], xs[i + 1], xtol=1e-15, rtol=4e-16)
            except (ValueError, EvaluationError):
                continue
            out.append(float(z))
    return sorted(set(out))


def split_point_check(arg: Expr, lo: float, hi: float):
    """Raise :class:`SplitRequired` if ``arg`` changes sign inside ``(lo, hi)``."""
    zs = sign_changes(arg, lo, hi)
    if zs:
        raise SplitRequired(zs[0])


def interior_sign(arg: Expr, lo: float, hi: float) -> float:
    """Sign of ``arg`` on the interior of ``(lo, hi)`` (assumed constant)."""
    xs = probe_points(lo, hi, 9)
    vals = [try_eval(arg, x) for x in xs]
    vals = [v for v in vals if not math.isnan(v) and v != 0.0]
    if not vals:
        return 0.0
    return 1.0 if vals[len(vals) // 2] > 0 else -1.0


def linear_form(e: Expr, dim: int):
    """Return ``(coeffs, const)`` when ``e`` is affine, else ``None``."""
    base = np.zeros((1, dim))
    try:
        c0 = float(evaluate(e, base)[0])
        coeffs = np.array([float(evaluate(e, np.eye(dim)[i:i + 1])[0]) - c0 for i in range(dim)])
    except EvaluationError:
        return None
    if not math.isfinite(c0) or not np.all(np.isfinite(coeffs)):
        return None
    probes = np.array([[0.7, -1.3, 2.1][:dim], [-3.2, 0.4, 1.9][:dim], [5.5, 2.25, -0.6][:dim]])
    try:
        got = evaluate(e, probes)
    except EvaluationError:
        return None
    want = probes @ coeffs + c0
    if not np.allclose(got, want, rtol=1e-9, atol=1e-9):
        return None
    return coeffs, c0
