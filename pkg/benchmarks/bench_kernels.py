"""Time the compiled kernels against the numpy/pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from gambler.kernels import backend_module


def _workloads(mod):
    U = np.random.Generator(np.random.PCG64(0)).random(1 << 20)
    F = mod.lattice_values(10, 0.6, 0.9)

    def lattice():
        mod.lattice_values(20, 0.6, 0.9)

    def bellman():
        mod.bellman_backup(F, 0.6, 0.9, 1, 0.0)

    def qlearn():
        N = 16
        Q = np.zeros((N + 1, N // 2 + 1))
        visits = np.zeros_like(Q, dtype=np.int64)
        returns = np.zeros(20_000)
        mod.qlearn_run(Q, visits, returns, U, 0, 0, 20_000, N, 0.55, 0.9,
                       0.5, 10.0, 0.5, 1e4, 1000)

    def simulate():
        den = 3
        bets = np.array([0, 1, 1, 0], dtype=np.int64)
        n = 100_000
        mod.simulate_run(bets, 2, den, 0.6, 1.0, 64, U, 0, 0, n,
                         np.zeros(n), np.zeros(n, dtype=np.int64), np.zeros(n, dtype=np.int64))

    return {
        "lattice_values level 20": lattice,
        "bellman_backup N=1024": bellman,
        "qlearn_run 20k episodes": qlearn,
        "simulate_run 100k episodes": simulate,
    }


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = {}
    for name in ("python", "cython"):
        try:
            backends[name] = _workloads(backend_module(name))
        except ImportError:
            print(f"{name} backend unavailable")
    print(f"{'kernel':<28}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for task in next(iter(backends.values())):
        t = {b: best_of(w[task], args.repeat) for b, w in backends.items()}
        ratio = t["python"] / t["cython"] if len(t) == 2 else float("nan")
        print(f"{task:<28}" + "".join(f"{v:>11.4f}s" for v in t.values()) + f"{ratio:>9.1f}x")


if __name__ == "__main__":
    main()
