"""Compare the compiled and NumPy block factorial-moment reductions.

Usage: python3 benchmarks/bench_kernels.py [n_records] [order]
"""
import sys
import timeit

import numpy as np

from mmsqueeze._kernels import _pymoments

try:
    from mmsqueeze._kernels import _cmoments
except ImportError:
    _cmoments = None


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 1_000_000
    order = int(sys.argv[2]) if len(sys.argv) > 2 else 3
    rng = np.random.default_rng(0)
    ns = rng.geometric(0.5, n).astype(np.int64) - 1
    ni = rng.binomial(ns, 0.5).astype(np.int64)
    impls = {"numpy": _pymoments.block_factorial_sums}
    if _cmoments is not None:
        impls["cython"] = _cmoments.block_factorial_sums
    ref = None
    print(f"records={n} order={order} blocks=20")
    for name, fn in impls.items():
        out = fn(ns, ni, 20, order)
        if ref is None:
            ref = out
        else:
            assert np.allclose(out, ref, rtol=1e-12, atol=0)
        t = min(timeit.repeat(lambda: fn(ns, ni, 20, order), number=1, repeat=5))
        print(f"{name:>7}: {t * 1e3:8.2f} ms  ({n / t / 1e6:.1f} M records/s)")
    if _cmoments is None:
        print("compiled extension not built; only the NumPy path was timed")


if __name__ == "__main__":
    main()
