"""Compare the compiled and numpy kernels on the roof and extension searches.

Usage: ``python3 benchmarks/bench_kernels.py [--states N] [--repeat R]``
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from entmono import kernels
from entmono.qcore import Bipartition, ginibre_random_density
from entmono.roof import ENTROPY, TANGLE, RoofConfig, roof_minimize
from entmono.squashed import squashed_upper_bound


def _workloads(n_states: int):
    seeds = np.random.SeedSequence(2024).spawn(n_states)
    two_qubit = [ginibre_random_density([2, 2], 1 + k % 4, s) for k, s in enumerate(seeds)]
    qutrit = [ginibre_random_density([3, 3], 3, s) for s in seeds]
    cut = Bipartition([0], [1])
    cfg = RoofConfig(restarts=4, max_iterations=500)
    sq_cfg = RoofConfig(restarts=1, max_iterations=50)
    return {
        "roof tangle 2x2": lambda: [roof_minimize(r, TANGLE, cut, cfg) for r in two_qubit],
        "roof entropy 2x2": lambda: [roof_minimize(r, ENTROPY, cut, cfg) for r in two_qubit],
        "roof tangle 3x3": lambda: [roof_minimize(r, TANGLE, cut, cfg) for r in qutrit],
        "squashed d_E=2": lambda: [squashed_upper_bound(r, 2, sq_cfg) for r in two_qubit[:4]],
    }


def _best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--states", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = kernels.available()
    previous = kernels.backend()
    work = _workloads(args.states)
    print(f"{'workload':<20}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    try:
        for name, fn in work.items():
            times = []
            for b in backends:
                kernels.use_backend(b)
                times.append(_best_of(fn, args.repeat))
            row = f"{name:<20}" + "".join(f"{t:>11.3f}s" for t in times)
            if len(times) > 1:
                row += f"{times[0] / times[1]:>11.1f}x"
            print(row)
    finally:
        kernels.use_backend(previous)


if __name__ == "__main__":
    main()
