"""Benchmark: compiled kernels vs the pure numpy/Python fallback.

Run from the repository root after building the extension in place:

    python3 setup.py build_ext --inplace
    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from rggham import NormSpec, geometric_graph
from rggham._kernels import pure
from rggham.geometry import rng_for_seed

try:
    from rggham._kernels import _native
except ImportError:
    _native = None


def timeit(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_ham_dp():
    print("anchored Hamilton-path subset DP")
    for n in (16, 18, 20, 22):
        rng = rng_for_seed(n)
        pts = rng.random((n, 2))
        g = geometric_graph(pts, NormSpec(2, 2.0), 0.5)
        masks = g.bitmasks()
        tp, dp_p = timeit(pure.ham_path_dp, masks, n)
        if _native is not None:
            tn, dp_n = timeit(_native.ham_path_dp, masks, n)
            assert np.array_equal(dp_p, dp_n)
            print(f"  n={n:2d}: pure {tp * 1e3:8.1f} ms   native {tn * 1e3:7.1f} ms   "
                  f"speedup {tp / tn:5.1f}x")
        else:
            print(f"  n={n:2d}: pure {tp * 1e3:8.1f} ms   (native not built)")


def bench_spectrum():
    print("cycle-length spectrum DP")
    for n in (14, 16, 18):
        rng = rng_for_seed(100 + n)
        pts = rng.random((n, 2))
        g = geometric_graph(pts, NormSpec(2, 2.0), 0.45)
        masks = g.bitmasks()
        tp, mp = timeit(pure.cycle_length_mask, masks, n)
        if _native is not None:
            tn, mn = timeit(_native.cycle_length_mask, masks, n)
            assert mp == mn
            print(f"  n={n:2d}: pure {tp * 1e3:8.1f} ms   native {tn * 1e3:7.1f} ms   "
                  f"speedup {tp / tn:5.1f}x")
        else:
            print(f"  n={n:2d}: pure {tp * 1e3:8.1f} ms   (native not built)")


def bench_knn():
    print("grid k-th nearest distances (k=2, l2)")
    for n in (20_000, 100_000):
        pts = rng_for_seed(n).random((n, 2))
        cell = (3.0 / n) ** 0.5
        tp, dp = timeit(pure.kth_nearest_all, pts, 2, 2.0, cell, repeat=2)
        if _native is not None:
            tn, dn = timeit(_native.kth_nearest_all, pts, 2, 2.0, cell, repeat=2)
            assert np.allclose(dp, dn, atol=0)
            print(f"  n={n:6d}: pure {tp * 1e3:8.1f} ms   native {tn * 1e3:7.1f} ms   "
                  f"speedup {tp / tn:5.1f}x")
        else:
            print(f"  n={n:6d}: pure {tp * 1e3:8.1f} ms   (native not built)")


if __name__ == "__main__":
    print(f"native extension available: {_native is not None}\n")
    bench_ham_dp()
    bench_spectrum()
    bench_knn()
