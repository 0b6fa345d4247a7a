"""Extended-real arithmetic on plain floats.

Values are Python floats (or float64 arrays) that may be ``+inf`` or
``-inf`` but never NaN. Addition resolves ``(+inf) + (-inf)`` to ``+inf``,
so sums of extended-real functions stay well defined; products use
``0 * (+-inf) = 0``.
"""

from __future__ import annotations

import math

import numpy as np

INF = math.inf
NEG_INF = -math.inf

ExtReal = float


def ext(value) -> float:
    """Coerce ``value`` to an extended real, rejecting NaN."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "+inf", "infinity", "+infinity", "oo"):
            return INF
        if text in ("-inf", "-infinity", "-oo"):
            return NEG_INF
    v = float(value)
    if math.isnan(v):
        raise ValueError("extended reals exclude NaN")
    return v


def is_finite(a: float) -> bool:
    return math.isfinite(a)


def ext_add(a: float, b: float) -> float:
    """Sum with ``(+inf) + (-inf) = +inf``."""
    if a == INF or b == INF:
        return INF
    if a == NEG_INF or b == NEG_INF:
        return NEG_INF
    return a + b


def ext_neg(a: float) -> float:
    return -a


def ext_sub(a: float, b: float) -> float:
    return ext_add(a, -b)


def ext_mul(a: float, b: float) -> float:
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


def ext_add_array(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        out = a + b
    pos = np.isposinf(a) | np.isposinf(b)
    if pos.any():
        out = np.where(pos, INF, out)
    return out


def ext_mul_array(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        out = a * b
    zero = (a == 0.0) | (b == 0.0)
    if zero.any():
        out = np.where(zero, 0.0, out)
    return out


def fmt(a: float) -> str:
    """Short deterministic text for an extended real."""
    if a == INF:
        return "inf"
    if a == NEG_INF:
        return "-inf"
    if a == 0.0:
        return "0"
    if float(a).is_integer() and abs(a) < 1e16:
        return str(int(a))
    return repr(float(a))
