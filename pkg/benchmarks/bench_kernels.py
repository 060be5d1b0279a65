"""Time the compiled kernels against the NumPy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from alhlab import _kernels_py as py

try:
    from alhlab import _ckernels as cy
except ImportError:
    cy = None


def inputs(rng, M, N):
    A = rng.standard_normal((M, N, N))
    g = A @ np.swapaxes(A, -1, -2) + N * np.eye(N)
    d2g = rng.standard_normal((M,) + (N,) * 4)
    return np.linalg.inv(g), rng.standard_normal((M, N, N, N)), d2g


def cases(rng):
    ginv, gam, d2g = inputs(rng, 625, 4)
    pts = rng.uniform(0, 1, (1500, 2))
    vals = np.sqrt(pts[:, 1]) + np.sin(pts[:, 0])
    return {
        "riemann_lower (625 nodes, N=4)": ("riemann_lower", (ginv, gam, d2g)),
        "b_tensor (625 nodes, N=4)": ("b_tensor", (ginv, d2g)),
        "pair_modulus (1500 points)": ("pair_modulus", (pts, vals, 0.5, -12, 14)),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'kernel':34s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s}")
    for label, (name, a) in cases(rng).items():
        t_py = min(timeit.repeat(lambda: getattr(py, name)(*a), number=1, repeat=args.repeat)) * 1e3
        if cy is None:
            print(f"{label:34s} {t_py:11.2f} {'n/a':>12s} {'n/a':>8s}")
            continue
        t_cy = min(timeit.repeat(lambda: getattr(cy, name)(*a), number=1, repeat=args.repeat)) * 1e3
        print(f"{label:34s} {t_py:11.2f} {t_cy:12.2f} {t_py / t_cy:7.1f}x")


if __name__ == "__main__":
    main()
