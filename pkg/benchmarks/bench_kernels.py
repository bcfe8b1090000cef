"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

import numpy as np

from cdcr import kernels


def time_call(fn, *args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_components(backends, n_nodes, n_edges, rng):
    ea = rng.integers(0, n_nodes, size=n_edges)
    eb = rng.integers(0, n_nodes, size=n_edges)
    return {
        name: time_call(mod.connected_components, n_nodes, ea, eb)
        for name, mod in backends.items()
    }


def bench_assignment(backends, size, rng):
    W = rng.normal(size=(size, size))
    results = {name: mod.max_weight_assignment(W) for name, mod in backends.items()}
    totals = {round(total, 9) for _, _, total in results.values()}
    assert len(totals) == 1, f"backends disagree: {totals}"
    return {
        name: time_call(mod.max_weight_assignment, W)
        for name, mod in backends.items()
    }


def report(label, timings):
    python_time = timings.get("python")
    parts = [f"{name}: {seconds * 1e3:9.2f} ms" for name, seconds in sorted(timings.items())]
    line = f"{label:<40s} " + "   ".join(parts)
    if "cython" in timings and python_time:
        line += f"   speedup: {python_time / timings['cython']:6.1f}x"
    print(line)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = parser.parse_args()

    backends = kernels.backends()
    print(f"available backends: {', '.join(sorted(backends))} "
          f"(package default: {kernels.BACKEND})\n")

    rng = np.random.default_rng(7)
    component_sizes = [(10_000, 30_000), (100_000, 300_000)]
    assignment_sizes = [50, 150]
    if not args.quick:
        component_sizes.append((500_000, 1_500_000))
        assignment_sizes.append(400)

    for n_nodes, n_edges in component_sizes:
        report(
            f"connected_components n={n_nodes:,} m={n_edges:,}",
            bench_components(backends, n_nodes, n_edges, rng),
        )
    print()
    for size in assignment_sizes:
        report(
            f"max_weight_assignment {size}x{size}",
            bench_assignment(backends, size, rng),
        )


if __name__ == "__main__":
    main()
