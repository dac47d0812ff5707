"""Time the compiled and pure-Python kernels on identical inputs.

    python benchmarks/bench_kernels.py [--steps N] [--repeat R]
"""
import argparse
import time

import numpy as np

from tablemoves import _kernels
from tablemoves.annealing.chain import draw_chunk


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def sa_case(n, steps, seed=0):
    rng = np.random.default_rng(seed)
    mu, nu = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
    table = np.outer(mu, nu)
    cost = np.sqrt(np.abs(np.subtract.outer(np.arange(n), np.arange(n)))).astype(float)
    draws = draw_chunk(rng, n, steps)
    temps = 1e-2 * 0.95 ** np.arange(steps, dtype=float)

    def run(mod):
        t = table.copy()
        mod.sa_chain(t, cost, *draws, temps, float(np.sum(table * cost)),
                     np.empty(steps), np.empty(steps, dtype=np.uint8))
    return run


def cycle_case(n, seed=0):
    rng = np.random.default_rng(seed)
    w = rng.normal(1.0, 0.5, (n, n))
    w[rng.random((n, n)) < 0.5] = np.inf
    np.fill_diagonal(w, 0.0)
    return lambda mod: mod.negative_cycle(w, 1e-12)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = _kernels.backends()
    if "cython" not in backends:
        print("compiled kernels not built; only the Python backend is available")
    cases = [(f"sa_chain n={n} steps={args.steps}", sa_case(n, args.steps)) for n in (4, 10, 20)]
    cases += [(f"negative_cycle n={n}", cycle_case(n)) for n in (20, 60)]
    print(f"{'case':<32}" + "".join(f"{b:>12}" for b in backends) + f"{'speed-up':>10}")
    for name, run in cases:
        t = {b: best_of(lambda m=mod: run(m), args.repeat) for b, mod in backends.items()}
        ratio = t["python"] / t["cython"] if "cython" in t else float("nan")
        print(f"{name:<32}" + "".join(f"{t[b] * 1e3:>10.2f}ms" for b in backends) + f"{ratio:>9.1f}x")


if __name__ == "__main__":
    main()
