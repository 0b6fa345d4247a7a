"""NumPy versions of the compiled kernels (same signatures and results)."""

from __future__ import annotations

import numpy as np

_CHUNK = 1 << 20


def epi_quotient_blocks(dx, dr, starts, xs):
    dx = np.ascontiguousarray(dx, dtype=float)
    dr = np.ascontiguousarray(dr, dtype=float)
    xs = np.ascontiguousarray(xs, dtype=float)
    inv_norm = 1.0 / np.sqrt(np.einsum("ij,ij->i", dx, dx) + dr * dr)
    out = np.full((xs.shape[0], len(starts) - 1), -np.inf)
    for b in range(len(starts) - 1):
        lo, hi = int(starts[b]), int(starts[b + 1])
        if hi <= lo:
            continue
        rows = max(1, _CHUNK // (hi - lo))
        for j0 in range(0, xs.shape[0], rows):
            q = (xs[j0:j0 + rows] @ dx[lo:hi].T - dr[lo:hi]) * inv_norm[lo:hi]
            out[j0:j0 + rows, b] = q.max(axis=1)
    return out


def pairwise_lipschitz(X, F):
    X = np.ascontiguousarray(X, dtype=float)
    F = np.ascontiguousarray(F, dtype=float)
    n = X.shape[0]
    best = 0.0
    rows = max(1, _CHUNK // max(n, 1))
    for i0 in range(0, n, rows):
        blk = X[i0:i0 + rows]
        dist = np.sqrt(((blk[:, None, :] - X[None, :, :]) ** 2).sum(axis=2))
        diff = np.abs(F[i0:i0 + rows, None] - F[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(dist > 0, diff / np.where(dist > 0, dist, 1.0), 0.0)
        if q.size:
            best = max(best, float(q.max()))
    return best
