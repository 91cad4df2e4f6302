"""Time the numba kernels against the numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--points N] [--repeat R]

Both backends are imported in one process (the fallbacks are always
defined), so the comparison runs on identical inputs.  Results are checked
for agreement before timing.
"""

import argparse
import time

import numpy as np

from lempert_lab import _kernels as K


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=1 << 20)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--degree", type=int, default=8)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    N = args.points
    z1 = rng.uniform(-1, 1, N) + 1j * rng.uniform(-1, 1, N)
    zr = (rng.uniform(-1, 1, (N, 1)) + 1j * rng.uniform(-1, 1, (N, 1))) * 0.9
    coeffs = rng.normal(size=(2, args.degree + 1)) * 0.1 + 0j
    zeta = np.exp(2j * np.pi * rng.uniform(size=N)) * rng.uniform(size=N)

    cases = [
        ("g_margins", lambda: K.g_margins_numpy(z1, zr, 1.5, K.TILDE),
         None if K.g_margins_jit is None else lambda: K.g_margins_jit(z1, zr, 1.5, K.TILDE)),
        ("poly_eval", lambda: K.poly_eval_numpy(coeffs, zeta),
         None if K.poly_eval_jit is None else lambda: K.poly_eval_jit(coeffs, zeta)),
    ]
    print(f"backend={K.backend()}  points={N}  repeat={args.repeat}")
    print(f"{'kernel':<12}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}{'max diff':>12}")
    for name, f_np, f_jit in cases:
        t_np = best_of(f_np, args.repeat)
        if f_jit is None:
            print(f"{name:<12}{t_np * 1e3:12.2f}{'n/a':>12}{'':>10}{'':>12}")
            continue
        f_jit()  # compile outside the timed region
        diff = float(np.max(np.abs(f_np() - f_jit())))
        t_jit = best_of(f_jit, args.repeat)
        print(f"{name:<12}{t_np * 1e3:12.2f}{t_jit * 1e3:12.2f}{t_np / t_jit:10.1f}{diff:12.2e}")


if __name__ == "__main__":
    main()
