"""Compare the compiled and pure-Python Jacobi eigendecomposition kernels.

Usage:
    python3 benchmarks/bench_jacobi.py [--dims 8,16,32,64] [--repeats 5]

Both backends run the identical cyclic sweep (relative threshold 1e-14,
at most 100 sweeps); this script reports wall time per call and the
reconstruction error ||V diag(w) V^T - M||_F for each.
"""

import argparse
import time

import numpy as np

from greedyopt import _jacobi_py

try:
    from greedyopt import _jacobi
    HAVE_COMPILED = True
except ImportError:
    _jacobi = None
    HAVE_COMPILED = False


def bench(backend, m, repeats):
    best = float("inf")
    w = v = None
    for _ in range(repeats):
        start = time.perf_counter()
        w, v, _sweeps, _converged = backend.jacobi_eigh(m, 1e-14, 100)
        best = min(best, time.perf_counter() - start)
    w = np.asarray(w)
    v = np.asarray(v)
    err = np.linalg.norm((v * w) @ v.T - m)
    return best, err


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dims", default="8,16,32,64")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    dims = [int(d) for d in args.dims.split(",")]
    print(f"{'dim':>5} {'cython (s)':>12} {'python (s)':>12} "
          f"{'speedup':>8} {'max recon err':>14}")
    for d in dims:
        a = rng.standard_normal((d, d))
        m = 0.5 * (a + a.T)
        t_py, err_py = bench(_jacobi_py, m, args.repeats)
        if HAVE_COMPILED:
            t_cy, err_cy = bench(_jacobi, m, args.repeats)
            print(f"{d:>5} {t_cy:>12.6f} {t_py:>12.6f} "
                  f"{t_py / t_cy:>7.1f}x {max(err_cy, err_py):>14.3e}")
        else:
            print(f"{d:>5} {'(missing)':>12} {t_py:>12.6f} "
                  f"{'-':>8} {err_py:>14.3e}")


if __name__ == "__main__":
    main()
