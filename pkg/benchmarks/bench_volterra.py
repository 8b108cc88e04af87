"""Timing comparison of the two Volterra history backends.

Runs the same trapezoidal solve once with the numpy einsum history sum and
once with the compiled kernel, on a synthetic damped-oscillator memory
problem and on the ten-element rotation state demo, and reports best-of-N
wall times plus the max deviation between the two trajectories.
"""

import argparse
import time

import numpy as np

from mzgle.demos import so3_state_matrices
from mzgle.nmz import HAVE_COMPILED, KernelTable, TimeGrid, solve_state_nmz, \
    solve_volterra


def synthetic_table(dim, n_steps, dt, seed=0):
    rng = np.random.default_rng(seed)
    S = rng.standard_normal((dim, dim))
    omega = 0.5 * (S - S.T)
    base = rng.standard_normal((dim, dim))
    base = 0.05 * (base + base.T) / dim
    t = dt * np.arange(n_steps + 1)
    damp = np.exp(-0.5 * t) * np.cos(1.3 * t)
    kstack = damp[:, None, None] * base[None]
    freqs = rng.uniform(0.5, 2.0, dim)
    rstack = 0.1 * np.cos(np.outer(t, freqs))
    x0 = rng.standard_normal(dim)
    grid = TimeGrid(dt, n_steps)
    return KernelTable(omega, kstack, rstack, grid), x0, grid


def best_of(fn, repeats):
    best = np.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_synthetic(dim, n_steps, dt, repeats):
    table, x0, grid = synthetic_table(dim, n_steps, dt)
    t_np, sol_np = best_of(
        lambda: solve_volterra(table, x0, grid, backend="numpy"), repeats)
    if not HAVE_COMPILED:
        return dim, n_steps, t_np, None, None
    t_cy, sol_cy = best_of(
        lambda: solve_volterra(table, x0, grid, backend="compiled"), repeats)
    dev = np.abs(sol_np.trajectory - sol_cy.trajectory).max()
    return dim, n_steps, t_np, t_cy, float(dev)


def bench_state_demo(n_steps, repeats):
    Ls, Ps = so3_state_matrices(1.0)
    rho0 = np.zeros(10)
    rho0[2] = 9.0
    grid = TimeGrid(2.0 / n_steps, n_steps)
    t_np, sol_np = best_of(
        lambda: solve_state_nmz(Ls, Ps, rho0, grid, backend="numpy"), repeats)
    if not HAVE_COMPILED:
        return t_np, None, None
    t_cy, sol_cy = best_of(
        lambda: solve_state_nmz(Ls, Ps, rho0, grid, backend="compiled"),
        repeats)
    dev = np.abs(sol_np.trajectory - sol_cy.trajectory).max()
    return t_np, t_cy, float(dev)


def fmt_row(name, dim, steps, t_np, t_cy, dev):
    if t_cy is None:
        return f"{name:<22s} {dim:>4d} {steps:>8d} {t_np:>10.3f}s " \
               f"{'-':>10s} {'-':>8s} {'-':>10s}"
    return f"{name:<22s} {dim:>4d} {steps:>8d} {t_np:>10.3f}s " \
           f"{t_cy:>9.3f}s {t_np / t_cy:>7.1f}x {dev:>10.2e}"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=8000,
                        help="synthetic problem step count")
    parser.add_argument("--dim", type=int, nargs="*", default=[2, 4, 8],
                        help="synthetic problem dimensions")
    parser.add_argument("--dt", type=float, default=1e-3)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    print(f"compiled backend available: {HAVE_COMPILED}")
    header = f"{'problem':<22s} {'dim':>4s} {'steps':>8s} {'numpy':>11s} " \
             f"{'compiled':>10s} {'speedup':>8s} {'max dev':>10s}"
    print(header)
    print("-" * len(header))
    for dim in args.dim:
        row = bench_synthetic(dim, args.steps, args.dt, args.repeats)
        print(fmt_row("synthetic", row[0], row[1], *row[2:]))
    t_np, t_cy, dev = bench_state_demo(args.steps, args.repeats)
    print(fmt_row("so3-state (reduced)", 3, args.steps, t_np, t_cy, dev))


if __name__ == "__main__":
    main()
