"""Kernel assembly, the Volterra stepper and the exactness identities."""

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import expm

from mzgle.algebra import BasisRep
from mzgle.demos import (so3_observable_matrices, so3_state_family,
                         so3_state_matrices, su2_observable_matrices,
                         su2_state_matrices)
from mzgle.nmz import (HAVE_COMPILED, BasisMismatch, GLEProblem, GLESolution,
                       KernelTable, PairingSingular, StepDivergence, TimeGrid,
                       assemble_gle, duality_check, dyson_check, lag_cache,
                       scalar_kernel_lift, solve_state_nmz, solve_volterra,
                       spectrum_report)


def test_time_grid_construction_and_span():
    g = TimeGrid(0.1, 10)
    assert len(g) == 11
    assert_allclose(g.t_max, 1.0, atol=1e-15)
    assert_allclose(g.times[3], 0.3, atol=1e-15)
    s = TimeGrid.span(10.0, 1e-3)
    assert s.n_steps == 10000
    assert_allclose(s.t_max, 10.0, atol=1e-12)
    with pytest.raises(ValueError):
        TimeGrid.span(1.0, 0.3)
    with pytest.raises(ValueError):
        TimeGrid(-0.1, 5)
    with pytest.raises(ValueError):
        TimeGrid(0.1, 0)


def test_lag_cache_tracks_the_matrix_exponential():
    rng = np.random.default_rng(5)
    M = 0.8 * rng.standard_normal((6, 6))
    E = lag_cache(M, 0.01, 400)
    assert E.shape == (401, 6, 6)
    dev = max(np.abs(E[j] - expm(j * 0.01 * M)).max()
              for j in (1, 50, 200, 400))
    assert dev <= 5e-12


def test_gle_problem_validation():
    _, L, P = su2_observable_matrices(1.0)
    prob = assemble_gle(L, P, np.array([1.0, 0.0]))
    assert_allclose(prob.omega, P @ L @ P, atol=1e-14)
    assert_allclose(prob.kernel(0.0), prob.PL @ prob.QL, atol=1e-12)
    with pytest.raises(BasisMismatch):
        GLEProblem(L, np.eye(3), np.array([1.0, 0.0]))
    with pytest.raises(BasisMismatch):
        GLEProblem(L, P, np.array([1.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        GLEProblem(L, 0.6 * np.eye(2), np.array([1.0, 0.0]))


def _su2_table(dt, t_max, lifted=True):
    _, L, P = su2_observable_matrices(1.0)
    x0 = np.array([1.0, 0.0])
    grid = TimeGrid.span(t_max, dt)
    table = KernelTable.from_problem(assemble_gle(L, P, x0), grid)
    if lifted:
        table = scalar_kernel_lift(table, x0)
    return table, x0, grid


def test_kernel_table_matches_problem_noise_and_kernel():
    _, L, P = su2_observable_matrices(1.0)
    x0 = np.array([0.3, -0.7])
    prob = assemble_gle(L, P, x0)
    grid = TimeGrid.span(0.5, 0.01)
    table = KernelTable.from_problem(prob, grid)
    for j in (0, 7, 50):
        t = grid.times[j]
        assert_allclose(table.rstack[j], prob.noise(t), atol=1e-12)
        assert_allclose(table.kstack[j], prob.kernel(t), atol=1e-12)
    with pytest.raises(BasisMismatch):
        KernelTable(prob.omega, table.kstack[:10], table.rstack, grid)


def test_volterra_halving_shows_second_order():
    errs = []
    for dt in (4e-3, 2e-3):
        table, x0, grid = _su2_table(dt, 2.0)
        sol = solve_volterra(table, x0, grid)
        ref = np.stack([np.cos(grid.times), np.sin(grid.times)], axis=1)
        errs.append(np.abs(sol.trajectory - ref).max())
    ratio = errs[0] / errs[1]
    assert 3.4 <= ratio <= 4.6, (errs, ratio)


def test_fixed_point_agrees_with_direct():
    table, x0, grid = _su2_table(2e-3, 1.0)
    a = solve_volterra(table, x0, grid, method="direct", backend="numpy")
    b = solve_volterra(table, x0, grid, method="fixed_point")
    assert np.abs(a.trajectory - b.trajectory).max() <= 1e-9
    assert a.meta["method"] == "direct"
    assert b.meta["method"] == "fixed_point"
    assert b.meta["backend"] == "numpy"
    with pytest.raises(ValueError):
        solve_volterra(table, x0, grid, method="euler")
    with pytest.raises(ValueError):
        solve_volterra(table, x0, grid, backend="fortran")
    with pytest.raises(BasisMismatch):
        solve_volterra(table, np.zeros(3), grid)
    with pytest.raises(BasisMismatch):
        solve_volterra(table, x0, TimeGrid(2e-3, 7))


def _synthetic_table(dim, n_steps, dt, seed):
    rng = np.random.default_rng(seed)
    S = rng.standard_normal((dim, dim))
    Om = S - S.T
    base = rng.standard_normal((dim, dim))
    sym = 0.05 * (base + base.T) / dim
    taus = dt * np.arange(n_steps + 1)
    ks = np.exp(-taus)[:, None, None] * np.cos(2.0 * taus)[:, None, None] * sym
    rs = 0.1 * np.cos(3.0 * taus)[:, None] * rng.standard_normal(dim)
    return KernelTable(Om.astype(complex), ks.astype(complex),
                       rs.astype(complex), TimeGrid(dt, n_steps))


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled stepper not built")
def test_compiled_and_numpy_backends_agree():
    table = _synthetic_table(3, 600, 1e-3, 11)
    x0 = np.array([1.0, -0.5, 0.25], dtype=complex)
    a = solve_volterra(table, x0, backend="compiled")
    b = solve_volterra(table, x0, backend="numpy")
    assert a.meta["backend"] == "compiled"
    assert b.meta["backend"] == "numpy"
    assert np.abs(a.trajectory - b.trajectory).max() <= 1e-13
    t2, x2, g2 = _su2_table(1e-3, 2.0)
    c = solve_volterra(t2, x2, g2, backend="compiled")
    d = solve_volterra(t2, x2, g2, backend="numpy")
    assert np.abs(c.trajectory - d.trajectory).max() <= 1e-13


def test_scalar_kernel_lift_values_and_rejection():
    table, x0, _ = _su2_table(1e-2, 1.0, lifted=False)
    lifted = scalar_kernel_lift(table, x0)
    assert_allclose(lifted.scalar_values, -np.ones(len(lifted.scalar_values)),
                    atol=1e-10)
    bad = _synthetic_table(3, 50, 1e-2, 12)
    with pytest.raises(ValueError):
        scalar_kernel_lift(bad, np.array([1.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        scalar_kernel_lift(table, np.zeros(2))


def test_state_solver_reduction_is_equivalent():
    Ls, Ps = su2_state_matrices(1.0)
    rho0 = np.zeros(4)
    rho0[1] = 1.0
    grid = TimeGrid.span(2.0, 1e-3)
    a = solve_state_nmz(Ls, Ps, rho0, grid, reduce=True)
    b = solve_state_nmz(Ls, Ps, rho0, grid, reduce=False)
    assert a.meta["reduced"] and not b.meta["reduced"]
    assert a.meta["rank"] == 2
    assert np.abs(a.trajectory - b.trajectory).max() <= 1e-9
    with pytest.raises(ValueError):
        solve_state_nmz(Ls, 0.6 * np.eye(4), rho0, grid)
    with pytest.raises(BasisMismatch):
        solve_state_nmz(Ls, Ps, np.zeros(5), grid)


def test_divergent_steppers_raise():
    dt = 0.1
    n = 100
    grid = TimeGrid(dt, n)
    ks = np.full((n + 1, 1, 1), 4.0 / dt ** 2, dtype=complex)
    table = KernelTable(np.array([[1e-8]], dtype=complex), ks,
                        np.zeros((n + 1, 1), dtype=complex), grid)
    with np.errstate(all="ignore"), pytest.raises(StepDivergence):
        solve_volterra(table, np.array([1.0], dtype=complex), grid,
                       backend="numpy")
    stiff = KernelTable(np.array([[-100.0]], dtype=complex),
                        np.zeros((n + 1, 1, 1), dtype=complex),
                        np.zeros((n + 1, 1), dtype=complex), grid)
    with np.errstate(all="ignore"), pytest.raises(StepDivergence):
        solve_volterra(stiff, np.array([1.0], dtype=complex), grid,
                       method="fixed_point")


@pytest.mark.parametrize("builder", [su2_observable_matrices,
                                     so3_observable_matrices])
def test_dyson_identity_on_both_observable_families(builder):
    _, L, P = builder()
    assert dyson_check(L, P, 0.0, 10) == 0.0
    assert dyson_check(L, P, 1.0, 200) <= 1e-8
    with pytest.raises(ValueError):
        dyson_check(L, P, 1.0, 3)
    with pytest.raises(BasisMismatch):
        dyson_check(L, np.eye(L.shape[0] + 1), 1.0, 10)


def test_duality_pairing_rejects_rank_deficient_families():
    family = so3_state_family()
    red = BasisRep(family.elements, labels=family.labels, validate=False)
    Ls, _ = so3_state_matrices(1.0)
    rho0 = np.zeros(10)
    rho0[1] = 9.0
    g0 = np.zeros(10)
    g0[0] = 1.0
    with pytest.raises(PairingSingular):
        duality_check(Ls, red, rho0, g0, np.linspace(0.0, 1.0, 3))


def test_spectrum_report_contents():
    _, L, P = su2_observable_matrices(1.0)
    rep = spectrum_report(L, P)
    assert set(rep) == {"L", "PLP", "QL"}
    assert_allclose(np.sort_complex(rep["L"]), [-1j, 1j], atol=1e-12)
    assert np.abs(rep["PLP"]).max() <= 1e-12


def test_solution_container_defaults():
    t = np.linspace(0.0, 1.0, 3)
    X = np.stack([t, 2.0 * t], axis=1)
    sol = GLESolution(t, X)
    assert sol.labels == ["x0", "x1"]
    assert sol.max_abs_error() is None
    sol.reference = X + 1e-4
    assert_allclose(sol.max_abs_error(), 1e-4, atol=1e-12)
    sol.diagnostics = np.array([0.0, 3e-5, 0.0])
    assert_allclose(sol.residual_max(), 3e-5, atol=0.0)
