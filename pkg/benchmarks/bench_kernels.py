"""Time the compiled and pure-Python curve kernels side by side.

    python3 benchmarks/bench_kernels.py [--calls N] [--bins B]
"""
import argparse
import time

import numpy as np

from fairalloc import kernels, solvers
from fairalloc.population import make_figure_population


def _time(fn, args_list):
    t0 = time.perf_counter()
    for args in args_list:
        fn(*args)
    return time.perf_counter() - t0


def bench_kernels(curve, calls, rng):
    caps = rng.uniform(0.0, 1.0, calls)
    tps = rng.uniform(0.0, curve.base_rate, calls)
    lams = np.exp(rng.uniform(0.0, 8.0, calls))
    vd, cw, cm = curve.values, curve.cw, curve.cm
    cases = {
        "tp_at": ("tp_at", [(vd, cw, cm, c) for c in caps]),
        "threshold_at": ("threshold_at", [(vd, cw, c) for c in caps]),
        "capacity_for_tp": ("capacity_for_tp", [(vd, cw, cm, h) for h in tps]),
        "capacity_for_ratio": ("capacity_for_ratio", [(vd, cw, cm, x) for x in lams]),
    }
    out = {}
    for label, (name, args) in cases.items():
        out[label] = {b: _time(getattr(mod, name), args) for b, mod in kernels.available_backends().items()}
    return out


def bench_solvers(pop, c, repeats):
    """Full solves with the kernel module swapped underneath the solvers."""
    names = ("tp_at", "threshold_at", "capacity_for_tp", "capacity_for_ratio", "marginal_score")
    saved = {n: getattr(kernels, n) for n in names}
    out = {}
    try:
        for backend, mod in kernels.available_backends().items():
            for n in names:
                setattr(kernels, n, getattr(mod, n))
            t0 = time.perf_counter()
            for _ in range(repeats):
                for regime in ("max_min", "proportional", "equal_opportunity"):
                    solvers.solve(pop, c, regime)
            out[backend] = time.perf_counter() - t0
    finally:
        for n, fn in saved.items():
            setattr(kernels, n, fn)
    return out


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--calls", type=int, default=20000)
    p.add_argument("--bins", type=int, default=10000)
    p.add_argument("--repeats", type=int, default=5)
    args = p.parse_args()
    rng = np.random.default_rng(0)
    pop = make_figure_population("fig3", args.bins)
    backends = list(kernels.available_backends())
    print(f"default backend: {kernels.BACKEND}; available: {', '.join(backends)}")
    print(f"{'kernel':<22}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for label, times in bench_kernels(pop[0].dist.curve, args.calls, rng).items():
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:<22}" + "".join(f"{times[b]:>11.4f}s" for b in backends) + f"{speed:>9.1f}x")
    times = bench_solvers(pop, 0.15, args.repeats)
    speed = times["python"] / times["cython"] if "cython" in times else float("nan")
    print(f"{'solve x3 regimes':<22}" + "".join(f"{times[b]:>11.4f}s" for b in backends) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
