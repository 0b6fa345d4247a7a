"""Kernel selection: the compiled extension when importable, else NumPy.

Set ``RELSUB_PURE_PYTHON=1`` to force the NumPy versions.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

if os.environ.get("RELSUB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "numpy"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py
        BACKEND = "numpy"


def epi_quotient_blocks(dx, dr, starts, xs, impl=None):
    """Per-block maxima of normalized epigraph pairings; shape ``(len(xs), len(starts) - 1)``."""
    impl = impl or _impl
    dx = np.ascontiguousarray(np.asarray(dx, dtype=float).reshape(len(dr), -1))
    xs = np.ascontiguousarray(np.asarray(xs, dtype=float).reshape(-1, dx.shape[1]))
    starts = np.ascontiguousarray(starts, dtype=np.int64)
    return impl.epi_quotient_blocks(dx, np.ascontiguousarray(dr, dtype=float), starts, xs)


def pairwise_lipschitz(X, F, impl=None):
    impl = impl or _impl
    X = np.asarray(X, dtype=float)
    X = np.ascontiguousarray(X.reshape(X.shape[0], -1))
    return float(impl.pairwise_lipschitz(X, np.ascontiguousarray(F, dtype=float)))
