"""Throughput of the compiled kernel against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--reps 100000] [--repeat 3]

Prints replicates per second for each backend and design, and checks that
both backends return the same rejection count.
"""

import argparse
import time

from wmwpower import _backend
from wmwpower.distributions import DistributionSpec, solve_alternative
from wmwpower.engine import StudyDesign, count_rejections

CASES = [
    ("normal 6x6", DistributionSpec.normal(), 6, 6),
    ("laplace 15x15", DistributionSpec.double_exponential(), 15, 15),
    ("exponential 6x12", DistributionSpec.exponential(), 6, 12),
    ("normal 50x50", DistributionSpec.normal(), 50, 50),
]


def best_time(fn, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=100_000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    backends = [("python", _backend.fallback)]
    if _backend.compiled is not None:
        backends.append(("compiled", _backend.compiled))
    else:
        print("compiled extension not built; timing the fallback only")

    print(f"{'case':<18}{'backend':<10}{'seconds':>9}{'reps/s':>12}{'speedup':>9}")
    for label, f, m, n in CASES:
        g = solve_alternative(f, 0.75).g
        design = StudyDesign(m, n)
        reps = args.reps if max(m, n) < 20 else args.reps // 10
        timings = {}
        counts = {}
        for name, be in backends:
            secs, q = best_time(lambda: count_rejections(f, g, design, reps, args.seed, backend=be),
                                args.repeat)
            timings[name], counts[name] = secs, q
        for name, _ in backends:
            speed = timings["python"] / timings[name]
            print(f"{label:<18}{name:<10}{timings[name]:>9.3f}{reps / timings[name]:>12.0f}{speed:>8.1f}x")
        if len(set(counts.values())) != 1:
            raise SystemExit(f"backends disagree on {label}: {counts}")


if __name__ == "__main__":
    main()
