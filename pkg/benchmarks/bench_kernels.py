"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py --repeat 5

Both implementations run on identical inputs; the largest absolute
difference between their outputs is printed next to the timings.
"""

import argparse
import statistics
import time

import numpy as np

from relsub import _kernels_py
from relsub.kernels import epi_quotient_blocks, pairwise_lipschitz

try:
    from relsub import _kernels as compiled
except ImportError:
    compiled = None


def epi_inputs(rng, n_blocks, per_block, n_xs, dim=1):
    sizes = np.full(n_blocks, per_block)
    starts = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    dx = rng.normal(size=(starts[-1], dim))
    dr = rng.normal(size=starts[-1])
    xs = rng.normal(size=(n_xs, dim))
    return dx, dr, starts, xs


def lip_inputs(rng, n):
    X = np.sort(rng.uniform(-1, 1, size=n))[:, None]
    F = np.abs(X[:, 0]) + 0.1 * X[:, 0] ** 3
    return X, F


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if compiled is None:
        print("compiled extension not built; only the NumPy path is available")
    rng = np.random.default_rng(args.seed)
    cases = [
        ("epi_quotient 3x400 pts, 2048 functionals",
         lambda impl, a=epi_inputs(rng, 3, 400, 2048): epi_quotient_blocks(*a, impl=impl)),
        ("epi_quotient 16x1300 pts, 64 functionals",
         lambda impl, a=epi_inputs(rng, 16, 1300, 64): epi_quotient_blocks(*a, impl=impl)),
        ("pairwise_lipschitz 512 pts",
         lambda impl, a=lip_inputs(rng, 512): pairwise_lipschitz(*a, impl=impl)),
        ("pairwise_lipschitz 4096 pts",
         lambda impl, a=lip_inputs(rng, 4096): pairwise_lipschitz(*a, impl=impl)),
    ]
    print(f"{'kernel':44s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, run in cases:
        t_np, _, out_np = best_of(lambda: run(_kernels_py), args.repeat)
        if compiled is None:
            print(f"{name:44s} {1e3 * t_np:11.2f} {'-':>12s} {'-':>8s} {'-':>11s}")
            continue
        t_cy, _, out_cy = best_of(lambda: run(compiled), args.repeat)
        diff = float(np.max(np.abs(np.asarray(out_np) - np.asarray(out_cy))))
        print(f"{name:44s} {1e3 * t_np:11.2f} {1e3 * t_cy:12.2f} {t_np / t_cy:8.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
