"""Reduced dynamics of bipartite quantum systems.

The joint state evolves unitarily under a Hamiltonian on H_A x H_B; the
reduced dynamics of the A factor is obtained two ways: exactly, by
diagonalizing H, and through the projection formalism with the partial-trace
conditional expectation against a fixed environment state.
"""

import numpy as np

from . import nmz
from .projections import (InvalidDensityMatrix, _check_density,
                          condexp_partial_trace, ptrace_B, vec)


class NotHermitian(ValueError):
    pass


MAX_JOINT_DIM = 16
HERMITICITY_TOL = 1e-12


def _check_hermitian(H, tol=HERMITICITY_TOL):
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise NotHermitian("Hamiltonian must be square")
    dev = np.abs(H - H.conj().T).max()
    if dev > tol:
        raise NotHermitian(f"Hamiltonian is not Hermitian (deviation {dev:.2e})")
    return H


class BipartiteSystem:
    """Joint Hamiltonian and initial state on H_A x H_B.

    rhoB is the environment reference state of the projection; it defaults to
    the B marginal of rho0, which makes the noise term vanish exactly for
    product initial states rho0 = sigma0 x rhoB.
    """

    def __init__(self, dA, dB, H, rho0, rhoB=None):
        dA, dB = int(dA), int(dB)
        if dA < 1 or dB < 1 or dA * dB > MAX_JOINT_DIM:
            raise ValueError(f"joint dimension must be between 1 and {MAX_JOINT_DIM}")
        n = dA * dB
        H = _check_hermitian(H)
        if H.shape != (n, n):
            raise NotHermitian(f"Hamiltonian must be {n} x {n}")
        rho0 = _check_density(np.asarray(rho0, dtype=complex))
        if rho0.shape != (n, n):
            raise InvalidDensityMatrix(f"initial state must be {n} x {n}")
        if rhoB is None:
            rhoB = np.einsum("abad->bd", rho0.reshape(dA, dB, dA, dB))
        rhoB = _check_density(np.asarray(rhoB, dtype=complex))
        if rhoB.shape != (dB, dB):
            raise InvalidDensityMatrix(f"environment state must be {dB} x {dB}")
        self.dA = dA
        self.dB = dB
        self.H = H
        self.rho0 = rho0
        self.rhoB = rhoB


def build_liouvillian_superop(H):
    """Superoperator of rho' = -i[H, rho] on column-stacked coordinates."""
    H = _check_hermitian(H)
    n = H.shape[0]
    eye = np.eye(n)
    return -1j * (np.kron(eye, H) - np.kron(H.T, eye))


def exact_reduce(system, grid):
    """Reduced trajectory Tr_B e^{-iHt} rho0 e^{iHt} by eigendecomposition."""
    dA, dB = system.dA, system.dB
    w, V = np.linalg.eigh(system.H)
    M = V.conj().T @ system.rho0 @ V
    gaps = np.subtract.outer(w, w)
    out = np.empty((len(grid), dA, dA), dtype=complex)
    for j, t in enumerate(grid.times):
        rho_t = V @ (M * np.exp(-1j * gaps * t)) @ V.conj().T
        out[j] = ptrace_B(rho_t, dA, dB)
    return out


def nmz_reduce_bipartite(system, grid, reduce=True, backend=None):
    """Reduced trajectory through the projected state equation.

    Builds the Liouvillian superoperator and the partial-trace conditional
    expectation, solves the closed equation for sigma(t) = P* rho(t) and
    returns the A-factor components rho_A(t) = Tr_B sigma(t) with positivity,
    hermiticity and trace diagnostics in meta.
    """
    dA, dB = system.dA, system.dB
    n = dA * dB
    Lst = build_liouvillian_superop(system.H)
    _, _, Pop = condexp_partial_trace(dA, dB, system.rhoB)
    sol = nmz.solve_state_nmz(Lst, Pop.predual, vec(system.rho0), grid,
                              reduce=reduce, backend=backend)
    X = sol.trajectory.astype(complex)
    sigma = X.reshape(len(grid), n, n).transpose(0, 2, 1)
    rhoA = np.einsum("tabcb->tac", sigma.reshape(len(grid), dA, dB, dA, dB))
    herm_dev = float(np.abs(rhoA - rhoA.conj().transpose(0, 2, 1)).max())
    trace_dev = float(np.abs(np.einsum("tii->t", rhoA) - 1.0).max())
    sym = (rhoA + rhoA.conj().transpose(0, 2, 1)) / 2.0
    min_eig = float(np.linalg.eigvalsh(sym).min())
    traj = rhoA.transpose(0, 2, 1).reshape(len(grid), dA * dA)
    labels = [f"rhoA{i}{j}" for j in range(dA) for i in range(dA)]
    meta = dict(sol.meta, herm_dev=herm_dev, trace_dev=trace_dev,
                min_eig=min_eig, dims=(dA, dB))
    return nmz.GLESolution(grid.times, traj, labels=labels,
                           diagnostics=sol.diagnostics, meta=meta)
