#!/usr/bin/env python3
"""Benchmark the compiled dual-descent kernel against the numpy fallback.

Times the fused value+subgradient evaluation across grid sizes, then an
end-to-end dual solve on a mid-size instance with each backend. Run as

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from capot.instances import generate_instance
from capot.kernels import available_backends
from capot import minimize_dual, solve_primal


def time_fused(mod, prob, repeats):
    rng = np.random.default_rng(0)
    u = rng.normal(0, 1, prob.m)
    v = rng.normal(0, 1, prob.n)
    du = np.empty(prob.m)
    dv = np.empty(prob.n)
    args = (prob.s.values, prob.hbar.values, prob.wx, prob.wy,
            prob.f, prob.g, u, v, du, dv)
    mod.eval_dual_with_subgrad(*args)  # warmup
    best = np.inf
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeats):
            mod.eval_dual_with_subgrad(*args)
        best = min(best, (time.perf_counter() - t0) / repeats)
    return best


def bench_kernel():
    backends = available_backends()
    print(f"backends: {', '.join(sorted(backends))}")
    print()
    header = f"{'grid':>10} " + " ".join(f"{name:>12}" for name in sorted(backends))
    if len(backends) == 2:
        header += f" {'speedup':>9}"
    print(header)
    for size in (8, 16, 32, 64, 128, 256):
        prob = generate_instance("random_feasible", size, size, seed=size)
        repeats = max(20, 200_000 // (size * size))
        times = {name: time_fused(mod, prob, repeats) for name, mod in backends.items()}
        row = f"{size}x{size:<7}" + " ".join(
            f"{times[name] * 1e6:>10.2f}us" for name in sorted(backends)
        )
        if len(times) == 2:
            row += f" {times['fallback'] / times['compiled']:>8.1f}x"
        print(row)


def bench_solve():
    backends = available_backends()
    prob = generate_instance("random_feasible", 20, 20, seed=99)
    target = solve_primal(prob).value
    print()
    print("end-to-end dual solve, 20x20, Polyak target, tol 1e-6:")
    import capot.kernels as K

    for name in sorted(backends):
        mod = backends[name]
        saved = (K.eval_dual, K.eval_dual_with_subgrad)
        K.eval_dual, K.eval_dual_with_subgrad = mod.eval_dual, mod.eval_dual_with_subgrad
        try:
            t0 = time.perf_counter()
            res = minimize_dual(prob, target_value=target,
                                tol=1e-6 * (1 + abs(target)), max_iter=300_000)
            dt = time.perf_counter() - t0
        finally:
            K.eval_dual, K.eval_dual_with_subgrad = saved
        print(f"  {name:>9}: {dt:7.3f}s, {res.iterations} iterations, "
              f"gap {res.gap:.2e}, converged={res.converged}")


if __name__ == "__main__":
    bench_kernel()
    bench_solve()
