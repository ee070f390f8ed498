"""Compare the numba and numpy simplex kernels.

Three workloads: random bounded LPs of a few sizes, screening the bundled
five-node system, and screening a 24-bus synthetic grid. Each is run once to
warm up (numba compiles on first call) and then timed over ``--repeat``
runs; the median is reported along with the speedup.

    python3 benchmarks/bench_simplex.py --repeat 3
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from ucscreen import cases
from ucscreen._accel import HAVE_NUMBA
from ucscreen.demandset import box_from_history, generate_history, hull_from_history
from ucscreen.grid import build_ptdf
from ucscreen.screening import MethodConfig, screen_all
from ucscreen.solver import GE, LE
from ucscreen.solver.simplex import solve_dense
from ucscreen.synthetic import random_grid


def random_lps(m: int, n: int, count: int, seed: int):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        A = rng.normal(size=(m, n))
        x0 = rng.uniform(0, 1, n)
        senses = np.where(rng.random(m) < 0.5, LE, GE)
        rhs = A @ x0 + np.where(senses == LE, 1.0, -1.0) * rng.uniform(0, 1, m)
        out.append((rng.normal(size=n), A, senses, rhs, np.zeros(n), np.full(n, 5.0)))
    return out


def run_lps(problems, backend):
    for c, A, s, b, lb, ub in problems:
        solve_dense(c, A, s, b, lb, ub, backend=backend)


def timed(fn, repeat: int) -> float:
    fn()  # warm-up / JIT
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return

    workloads = []
    for m, n, count in ((10, 20, 200), (40, 80, 50), (120, 200, 10)):
        probs = random_lps(m, n, count, seed=m)
        workloads.append((f"random LP {m}x{n} x{count}", lambda b, p=probs: run_lps(p, b)))

    five = cases.five_node()
    five_ptdf = build_ptdf(five)
    hull5 = MethodConfig(hull_from_history(cases.five_node_history()))
    workloads.append(("screen five-node CC", lambda b: screen_all(five, five_ptdf, hull5, backend=b)))

    case = random_grid(24, 10, seed=1)
    hist = generate_history(case.xi, 300, case.load_range, seed=1, buses=case.grid.buses)
    ptdf24 = build_ptdf(case.grid)
    for tag, dset in (("BN", box_from_history(hist)), ("CC", hull_from_history(hist))):
        cfg = MethodConfig(dset)
        workloads.append((f"screen 24-bus {tag}",
                          lambda b, c=cfg: screen_all(case.grid, ptdf24, c, backend=b)))

    print(f"{'workload':32s} {'numpy (s)':>10s} {'numba (s)':>10s} {'speedup':>8s}")
    for name, fn in workloads:
        t_np = timed(lambda: fn("numpy"), args.repeat)
        t_nb = timed(lambda: fn("numba"), args.repeat)
        print(f"{name:32s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
