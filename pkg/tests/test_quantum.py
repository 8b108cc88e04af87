"""Bipartite reduction against the diagonalized joint propagator."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from mzgle.nmz import TimeGrid
from mzgle.projections import InvalidDensityMatrix, unvec, vec
from mzgle.quantum import (MAX_JOINT_DIM, BipartiteSystem, NotHermitian,
                           build_liouvillian_superop, exact_reduce,
                           nmz_reduce_bipartite)

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
I2 = np.eye(2)


def _two_qubit_h(omega=1.0, gamma=0.3):
    return 0.5 * omega * (np.kron(SZ, I2) + np.kron(I2, SZ)) \
        + gamma * np.kron(SX, SX)


def test_liouvillian_superop_implements_the_commutator():
    rng = np.random.default_rng(0)
    G = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    H = G + G.conj().T
    L = build_liouvillian_superop(H)
    rho = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert_allclose(unvec(L @ vec(rho), 4), -1j * (H @ rho - rho @ H),
                    atol=1e-12)
    with pytest.raises(NotHermitian):
        build_liouvillian_superop(G)
    with pytest.raises(NotHermitian):
        build_liouvillian_superop(np.ones((2, 3)))


def test_bipartite_system_validation_and_marginal_default():
    H = _two_qubit_h()
    rhoB = np.diag([0.7, 0.3]).astype(complex)
    sigma0 = 0.5 * np.ones((2, 2), dtype=complex)
    sys0 = BipartiteSystem(2, 2, H, np.kron(sigma0, rhoB))
    assert_allclose(sys0.rhoB, rhoB, atol=1e-14)
    assert MAX_JOINT_DIM == 16
    with pytest.raises(ValueError):
        BipartiteSystem(5, 4, np.eye(20), np.eye(20) / 20.0)
    with pytest.raises(NotHermitian):
        BipartiteSystem(2, 2, H + 0.1j * np.eye(4), np.kron(sigma0, rhoB))
    with pytest.raises(InvalidDensityMatrix):
        BipartiteSystem(2, 2, H, np.eye(4))
    with pytest.raises(InvalidDensityMatrix):
        BipartiteSystem(2, 2, H, np.kron(sigma0, rhoB), rhoB=np.eye(3) / 3.0)


def test_exact_reduce_matches_free_precession():
    H = _two_qubit_h(omega=1.3, gamma=0.0)
    rhoB = np.diag([0.6, 0.4]).astype(complex)
    sigma0 = 0.5 * np.ones((2, 2), dtype=complex)
    system = BipartiteSystem(2, 2, H, np.kron(sigma0, rhoB), rhoB)
    grid = TimeGrid.span(2.0, 0.05)
    rhoA = exact_reduce(system, grid)
    t = grid.times
    phase = np.exp(-1.3j * t)
    expected = 0.5 * np.stack(
        [np.stack([np.ones_like(t), phase], axis=1),
         np.stack([phase.conj(), np.ones_like(t)], axis=1)], axis=1)
    assert np.abs(rhoA - expected).max() <= 1e-12


def test_nmz_reduction_tracks_the_exact_answer():
    H = _two_qubit_h()
    rhoB = np.diag([0.7, 0.3]).astype(complex)
    sigma0 = 0.5 * np.ones((2, 2), dtype=complex)
    system = BipartiteSystem(2, 2, H, np.kron(sigma0, rhoB), rhoB)
    grid = TimeGrid.span(1.0, 1e-3)
    sol = nmz_reduce_bipartite(system, grid)
    ref = exact_reduce(system, grid)
    got = sol.trajectory.reshape(len(grid), 2, 2).transpose(0, 2, 1)
    assert np.abs(got - ref).max() <= 1e-6
    assert sol.labels == ["rhoA00", "rhoA10", "rhoA01", "rhoA11"]
    assert sol.meta["herm_dev"] <= 1e-12
    assert sol.meta["trace_dev"] <= 1e-12
    assert sol.meta["min_eig"] >= -1e-12
    assert sol.meta["dims"] == (2, 2)
    assert sol.meta["noise_max"] <= 1e-12


def test_entangled_start_exercises_the_noise_term():
    H = _two_qubit_h()
    phi = np.zeros(4, dtype=complex)
    phi[0] = np.sqrt(0.7)
    phi[3] = np.sqrt(0.3)
    rho0 = np.outer(phi, phi.conj())
    system = BipartiteSystem(2, 2, H, rho0)
    assert_allclose(system.rhoB, np.diag([0.7, 0.3]), atol=1e-14)
    grid = TimeGrid.span(2.0, 1e-3)
    sol = nmz_reduce_bipartite(system, grid)
    ref = exact_reduce(system, grid)
    got = sol.trajectory.reshape(len(grid), 2, 2).transpose(0, 2, 1)
    assert np.abs(got - ref).max() <= 5e-7
    assert sol.meta["noise_max"] > 0.1
