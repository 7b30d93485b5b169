"""Time the compiled and pure-Python alignment kernels on the same workload.

    python3 benchmarks/bench_align.py [--pairs N] [--length L] [--repeat R]
"""

import argparse
import time

import numpy as np

from speechkit._kernels import _align_py

try:
    from speechkit._kernels import _align_ext
except ImportError:
    _align_ext = None


def workload(n_pairs, length, seed=0):
    rng = np.random.default_rng(seed)

    def draw(n):
        return rng.integers(0, 50, n).astype(np.int32)

    return [(draw(length), draw(length + int(rng.integers(-3, 4)))) for _ in range(n_pairs)]


def best_time(fn, pairs, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        for r, h in pairs:
            fn(r, h)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=300)
    ap.add_argument("--length", type=int, default=60)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    pairs = workload(args.pairs, args.length)
    py = best_time(_align_py.align_codes, pairs, args.repeat)
    print(f"python  {py * 1e3:9.2f} ms  ({args.pairs} pairs, length ~{args.length})")
    if _align_ext is None:
        print("cython  unavailable (extension not built)")
        return
    for r, h in pairs[:20]:
        assert all(np.array_equal(a, b) for a, b in zip(_align_ext.align_codes(r, h), _align_py.align_codes(r, h)))
    cy = best_time(_align_ext.align_codes, pairs, args.repeat)
    print(f"cython  {cy * 1e3:9.2f} ms  speedup {py / cy:.1f}x")


if __name__ == "__main__":
    main()
