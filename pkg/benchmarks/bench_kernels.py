"""Timing comparison of the compiled and pure-numpy solver kernels.

Run:  python3 benchmarks/bench_kernels.py

Sizes mirror the subproblems this package actually solves: the embedded
joint-beamformer blocks (side 36 at the default array size, 72 at the
largest swept size) and the embedded per-location sensing blocks (side 12),
with batch sizes matching typical constraint counts per block.
"""

import time

import numpy as np

from danisac.conic import _kernels_py
from danisac.conic.embedding import svec_indices

try:
    from danisac.conic import _kernels as _compiled
except ImportError:
    _compiled = None


def _case(rng, n, m):
    B = rng.normal(size=(n, n))
    G = B @ B.T + 0.1 * np.eye(n)
    C = rng.normal(size=(m, n, n))
    C = np.ascontiguousarray(0.5 * (C + np.transpose(C, (0, 2, 1))))
    return np.ascontiguousarray(G), C


def _time(fn, reps):
    fn()  # warm up
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def main():
    rng = np.random.default_rng(0)
    cases = [(12, 80, 2000), (36, 60, 500), (72, 40, 100)]
    print("congruence_pack: svec(G C_i G) over a (m, n, n) stack")
    print("%6s %6s %14s %14s %8s" % ("n", "m", "numpy (us)", "compiled (us)", "ratio"))
    for n, m, reps in cases:
        G, C = _case(rng, n, m)
        rows, cols, w, w_inv = svec_indices(n)
        t_py = _time(lambda: _kernels_py.congruence_pack(G, C, rows, cols, w), reps)
        if _compiled is None:
            print("%6d %6d %14.1f %14s %8s" % (n, m, 1e6 * t_py, "n/a", "n/a"))
            continue
        t_cy = _time(lambda: _compiled.congruence_pack(G, C, rows, cols, w), reps)
        print("%6d %6d %14.1f %14.1f %8.2f" % (n, m, 1e6 * t_py, 1e6 * t_cy, t_py / t_cy))

    print()
    print("svec_unpack_batch: packed rows (m, d) -> symmetric stack (m, n, n)")
    print("%6s %6s %14s %14s %8s" % ("n", "m", "numpy (us)", "compiled (us)", "ratio"))
    for n, m, reps in cases:
        d = n * (n + 1) // 2
        V = rng.normal(size=(m, d))
        rows, cols, w, w_inv = svec_indices(n)
        t_py = _time(lambda: _kernels_py.svec_unpack_batch(V, n, rows, cols, w_inv), reps)
        if _compiled is None:
            print("%6d %6d %14.1f %14s %8s" % (n, m, 1e6 * t_py, "n/a", "n/a"))
            continue
        t_cy = _time(lambda: _compiled.svec_unpack_batch(V, n, rows, cols, w_inv), reps)
        print("%6d %6d %14.1f %14.1f %8.2f" % (n, m, 1e6 * t_py, 1e6 * t_cy, t_py / t_cy))

    if _compiled is None:
        print("\ncompiled backend unavailable; showing numpy fallback only")


if __name__ == "__main__":
    main()
