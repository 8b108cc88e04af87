"""Conditional expectation constructors, axiom checks and the torus ratio."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from mzgle.projections import (EmptySpace, FiniteMeasureSpace,
                               FiniteObservable, InvalidDensityMatrix,
                               NotNormalized, ProjectionOp, _check_density,
                               condexp_level_sets, condexp_partial_trace,
                               condexp_tensor, negative_control, ptrace_B,
                               torus_q_norm_demo, unvec, vec,
                               verify_condexp_axioms,
                               verify_state_preservation)


def test_vec_stacks_columns():
    M = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert_allclose(vec(M), [1.0, 3.0, 2.0, 4.0], atol=0.0)
    assert_allclose(unvec(vec(M), 2), M, atol=0.0)
    rect = np.arange(6.0).reshape(2, 3)
    assert_allclose(unvec(vec(rect), 2, 3), rect, atol=0.0)


def test_ptrace_of_kron_factorizes():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    B = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert_allclose(ptrace_B(np.kron(A, B), 3, 4), A * np.trace(B), atol=1e-14)


def test_measure_space_validation():
    with pytest.raises(EmptySpace):
        FiniteMeasureSpace(np.array([]), np.array([]))
    with pytest.raises(ValueError):
        FiniteMeasureSpace(np.arange(3), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        FiniteMeasureSpace(np.arange(2), np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        FiniteMeasureSpace(np.arange(2), np.array([1.0, -2.0]))
    sp = FiniteMeasureSpace(np.arange(4), np.array([1.0, 2.0, 1.0, 2.0]))
    assert len(sp) == 4
    with pytest.raises(ValueError):
        FiniteObservable(sp, np.zeros(3))


def test_level_sets_average_within_bins():
    sp = FiniteMeasureSpace(np.arange(4), np.array([1.0, 2.0, 1.0, 2.0]))
    h = FiniteObservable(sp, np.array([0.0, 1.0, 0.0, 1.0]))
    op = condexp_level_sets(sp, h)
    assert op.n_bins == 2
    f = np.array([1.0, 2.0, 5.0, 10.0])
    out = op.matrix @ f
    assert_allclose(out, [3.0, 6.0, 3.0, 6.0], atol=1e-14)
    assert_allclose(op.matrix @ np.ones(4), np.ones(4), atol=1e-14)
    assert_allclose(op.matrix @ op.matrix, op.matrix, atol=1e-14)


def test_level_set_ties_chain_transitively():
    sp = FiniteMeasureSpace(np.arange(3), np.ones(3))
    op = condexp_level_sets(sp, np.array([0.0, 0.5, 1.0]), bin_tol=0.6)
    assert op.n_bins == 1
    tight = condexp_level_sets(sp, np.array([0.0, 0.5, 1.0]), bin_tol=0.1)
    assert tight.n_bins == 3
    with pytest.raises(ValueError):
        condexp_level_sets(sp, np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        condexp_level_sets(sp, np.array([1j, 0.0, 0.0]))


def test_tensor_condexp_known_action():
    spN = FiniteMeasureSpace(np.arange(2), np.ones(2))
    spR = FiniteMeasureSpace(np.arange(3), np.ones(3))
    p = np.array([0.5, 0.3, 0.2])
    pi, K, op = condexp_tensor(spN, spR, p)
    f = np.arange(6.0)  # f(x, y) at index x*3 + y
    marg = np.array([p @ f[:3], p @ f[3:]])
    assert_allclose(pi @ f, marg, atol=1e-14)
    assert_allclose(K @ marg, np.repeat(marg, 3), atol=1e-14)
    assert_allclose(op.matrix @ f, np.repeat(marg, 3), atol=1e-14)
    with pytest.raises(NotNormalized):
        condexp_tensor(spN, spR, np.array([0.5, 0.6, 0.2]))
    with pytest.raises(NotNormalized):
        condexp_tensor(spN, spR, np.array([1.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        condexp_tensor(spN, spR, np.array([0.5, 0.5]))


def _dense_rho(rng, d):
    G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def test_partial_trace_defining_property():
    rng = np.random.default_rng(1)
    dA, dB = 2, 3
    rhoB = _dense_rho(rng, dB)
    pi, K, op = condexp_partial_trace(dA, dB, rhoB)
    n = dA * dB
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    win = np.kron(np.eye(dA), rhoB)
    expected = np.kron(ptrace_B(X @ win, dA, dB), np.eye(dB))
    assert_allclose(unvec(op.matrix @ vec(X), n), expected, atol=1e-12)
    rho = _dense_rho(rng, n)
    lifted = np.kron(ptrace_B(rho, dA, dB), rhoB)
    assert_allclose(unvec(op.predual @ vec(rho), n), lifted, atol=1e-12)


def test_partial_trace_fixes_a_factor_and_scales_b_factor():
    rng = np.random.default_rng(2)
    dA, dB = 2, 2
    rhoB = np.diag([0.7, 0.3]).astype(complex)
    _, _, op = condexp_partial_trace(dA, dB, rhoB)
    A = rng.standard_normal((dA, dA)) + 1j * rng.standard_normal((dA, dA))
    XA = np.kron(A, np.eye(dB))
    assert_allclose(unvec(op.matrix @ vec(XA), dA * dB), XA, atol=1e-12)
    Y = rng.standard_normal((dB, dB)) + 1j * rng.standard_normal((dB, dB))
    XB = np.kron(np.eye(dA), Y)
    scaled = np.trace(rhoB @ Y) * np.eye(dA * dB)
    assert_allclose(unvec(op.matrix @ vec(XB), dA * dB), scaled, atol=1e-12)
    with pytest.raises(InvalidDensityMatrix):
        condexp_partial_trace(dA, 3, rhoB)


def test_projection_op_rejects_non_idempotent_maps():
    M = 0.6 * np.eye(3)
    with pytest.raises(ValueError):
        ProjectionOp(M, M.copy(), "broken", np.ones(3) / 3, np.ones(3))
    good = np.eye(3)
    op = ProjectionOp(good, good.copy(), "identity", np.ones(3) / 3, np.ones(3))
    assert op.complement_sup_norm() == 0.0


def test_density_matrix_validation():
    with pytest.raises(InvalidDensityMatrix):
        _check_density(np.zeros((2, 3)))
    with pytest.raises(InvalidDensityMatrix):
        _check_density(np.array([[0.5, 1.0], [0.0, 0.5]]))
    with pytest.raises(InvalidDensityMatrix):
        _check_density(np.eye(2))
    with pytest.raises(InvalidDensityMatrix):
        _check_density(np.diag([1.5, -0.5]))
    rho = _check_density(np.diag([0.25, 0.75]))
    assert rho.dtype == complex


def _constructed_projections(seed=0):
    rng = np.random.default_rng(seed)
    sp = FiniteMeasureSpace(np.arange(60), rng.uniform(0.5, 2.0, 60))
    h = np.floor(np.linspace(0.0, 5.999, 60))
    yield condexp_level_sets(sp, h)
    spN = FiniteMeasureSpace(np.arange(6), np.ones(6))
    spR = FiniteMeasureSpace(np.arange(5), np.ones(5))
    p = rng.uniform(0.5, 1.5, 5)
    yield condexp_tensor(spN, spR, p / p.sum())[2]
    yield condexp_partial_trace(2, 2, np.diag([0.7, 0.3]))[2]


@pytest.mark.parametrize("idx", [0, 1, 2])
def test_axiom_sweep_passes_and_negative_control_fails(idx):
    op = list(_constructed_projections())[idx]
    report = verify_condexp_axioms(op, trials=200, seed=0)
    assert report["pass"], report
    assert report["max_deviation"] <= 1e-10
    nc = report["negative_control"]
    assert nc["built"] and nc["fails"]
    assert len(nc["violated"]) > 0
    assert verify_state_preservation(op, trials=200, seed=0)


def test_negative_control_is_a_genuine_projection():
    op = list(_constructed_projections())[0]
    bad = negative_control(op)
    assert_allclose(bad.matrix @ bad.matrix, bad.matrix, atol=1e-10)
    rep = verify_condexp_axioms(bad, trials=50, seed=1)
    assert not rep["pass"]


def test_torus_ratio_frozen_values_and_monotonicity():
    got = [torus_q_norm_demo(n) for n in (1.0, 10.0, 100.0)]
    frozen = [0.15470706190352712, 1.498674632489076, 1.94986743450738]
    assert_allclose(got, frozen, atol=1e-9)
    assert got[0] < got[1] < got[2]
    assert got[2] >= 1.9
    with pytest.raises(ValueError):
        torus_q_norm_demo(1.0, grid_size=4)
