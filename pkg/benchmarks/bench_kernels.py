#!/usr/bin/env python3
"""Timing harness for the dual-path kernels.

Each kernel runs on inputs sized like real detector work, once through the
plain numpy implementation and once through the compiled path when numba is
available. Compilation happens during warm-up, so the table shows
steady-state times. Run with NSCA_NO_NUMBA=1 to confirm the fallback column
on its own.

Usage: python3 benchmarks/bench_kernels.py [--t 20000] [--repeats 5]
"""

import argparse
import time

import numpy as np

from nsca import _kernels as K


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        dt = time.perf_counter() - t0
        if dt < best:
            best = dt
    return best


def build_cases(T):
    rng = np.random.default_rng(0)
    n = 8
    G = rng.standard_normal((n, n))
    S = np.ascontiguousarray(G @ G.T + n * np.eye(n))
    L = np.linalg.cholesky(S)
    B = np.ascontiguousarray(rng.standard_normal((n, n)))
    M = np.empty((6, n, n))
    R = rng.standard_normal((n, n))
    for i in range(6):
        M[i] = R.T @ np.diag(0.5 + rng.random(n)) @ R
    weights = np.ones(6)
    x = rng.standard_normal(T)
    m = 4
    xt = np.ascontiguousarray(rng.standard_normal((T, m)))
    F = np.eye(m)
    H = np.eye(m)
    Qm = np.ascontiguousarray(0.01 * np.eye(m))
    Rm = np.ascontiguousarray(np.eye(m))
    x0 = np.zeros(m)
    P0 = np.ascontiguousarray(np.eye(m))
    return [
        ("cholesky 8x8", "cholesky", lambda f: f(S, 0.0)),
        ("solve_lower 8x8", "solve_lower", lambda f: f(L, B)),
        ("jacobi_eig 8x8", "jacobi_eig", lambda f: f(S, 100, 1e-12)),
        ("ajd_rotate K=6 n=8", "ajd_rotate", lambda f: f(M.copy(), weights, 200, 1e-10)),
        (f"ad_sliding T={T} p=64", "ad_sliding", lambda f: f(x, 64, 0.0, 1.0, 1e-12)),
        (f"easi_scan T={T} n={m}", "easi_scan", lambda f: f(xt, 0.01, 0, 1e6)),
        (f"kalman_scan T={T} n={m}", "kalman_scan", lambda f: f(xt, F, H, Qm, Rm, x0, P0)),
        (f"ar_sliding T={T} w=512 q=4", "ar_sliding", lambda f: f(x, 512, 4, 1e-300)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--t", type=int, default=20_000, help="series length for the scans")
    ap.add_argument("--repeats", type=int, default=5, help="best-of repeats per kernel")
    args = ap.parse_args()

    print(f"numba active: {K.HAVE_NUMBA}   (NSCA_NO_NUMBA disables it)")
    header = f"{'kernel':<28}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, base, call in build_cases(args.t):
        f_np = getattr(K, base + "_np")
        f_nb = getattr(K, base + "_nb", None)
        call(f_np)
        t_np = best_of(lambda: call(f_np), args.repeats) * 1e3
        if f_nb is None:
            print(f"{label:<28}{t_np:>12.3f}{'-':>12}{'-':>10}")
            continue
        call(f_nb)  # triggers compilation outside the timing
        t_nb = best_of(lambda: call(f_nb), args.repeats) * 1e3
        print(f"{label:<28}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
