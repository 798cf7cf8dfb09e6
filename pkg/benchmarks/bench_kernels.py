"""Time every hot kernel with numba and with its numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--end-to-end]

Kernel results are compared before timing, so a mismatch between the two
paths fails loudly.  ``--end-to-end`` also times a few full solves in child
processes with ALPHA_MST_NUMBA=1 and =0.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from alpha_mst import _accel, kernels
from alpha_mst.geometry import Alpha, build_tables
from alpha_mst.instance import Instance
from alpha_mst.oracle import admissibility_table


def bench(fn, repeat):
    fn()  # warm up (and compile)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def both(fn, repeat):
    _accel.NUMBA_ENABLED = True
    a = fn()
    t_nb = bench(fn, repeat)
    _accel.NUMBA_ENABLED = False
    b = fn()
    t_np = bench(fn, repeat)
    _accel.NUMBA_ENABLED = True
    return a, b, t_nb, t_np


def cases(rng):
    k = 16
    cov = rng.integers(0, 1 << k, size=k) | (1 << np.arange(k))
    x = rng.random(k)
    yield "lac subset scan (k=16)", lambda: kernels.best_violated_subset(cov, x, False), \
        lambda a, b: a[0] == b[0] and abs(a[1] - b[1]) < 1e-12

    V = 60
    cap = rng.random((V, V)) * (rng.random((V, V)) < 0.3)
    yield "min cut (60 nodes)", lambda: kernels.min_cut(cap, 0, V - 1), \
        lambda a, b: abs(a[0] - b[0]) < 1e-9

    N = 400
    W = np.where(rng.random((N, N)) < 0.05, rng.random((N, N)), np.inf)
    yield "dijkstra (400 nodes)", lambda: kernels.shortest_path(W, 0), \
        lambda a, b: np.allclose(a[0], b[0])

    n = 8
    inst = Instance("bench", rng.random((n, 2)) * 100)
    adm = admissibility_table(build_tables(inst, Alpha(1, 2)))
    yield "tree enumeration (n=8)", lambda: kernels.enumerate_trees(n, inst.edge_index, adm, inst.weights), \
        lambda a, b: np.array_equal(np.sort(a[0]), np.sort(b[0]))


def end_to_end(repeat):
    code = ("import time, numpy as np\n"
            "from alpha_mst import solve, build_tables, Alpha, FormulationKind\n"
            "from alpha_mst.datasets import tsplib_suite\n"
            "inst = tsplib_suite(12)[0]\n"
            "t = time.perf_counter()\n"
            "for a in (Alpha(1, 3), Alpha(1, 2)):\n"
            "    solve(inst, build_tables(inst, a), FormulationKind.FX_PLUSPLUS)\n"
            "print(time.perf_counter() - t)\n")
    out = {}
    for flag in ("1", "0"):
        env = dict(os.environ, ALPHA_MST_NUMBA=flag)
        runs = [float(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                                     check=True).stdout) for _ in range(repeat)]
        out[flag] = min(runs)
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args(argv)
    if not _accel.NUMBA_ENABLED:
        print("numba disabled or missing; nothing to compare")
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':28s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}")
    for name, fn, same in cases(rng):
        a, b, t_nb, t_np = both(fn, args.repeat)
        if not same(a, b):
            raise SystemExit(f"{name}: numba and numpy results differ")
        print(f"{name:28s} {t_nb:10.5f} {t_np:10.5f} {t_np / t_nb:8.1f}x")
    if args.end_to_end:
        t = end_to_end(max(1, args.repeat // 2))
        print(f"{'solve n=12, two angles':28s} {t['1']:10.3f} {t['0']:10.3f} {t['0'] / t['1']:8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
