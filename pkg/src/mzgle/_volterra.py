"""Trapezoidal stepper for linear Volterra integro-differential equations.

Advances x' = Omega x + R(t) + int_0^t K(t-s) x(s) ds on a uniform grid.  The
memory integral is discretized by the trapezoid rule, the resulting implicit
node is resolved either through the precomputed inverse of the constant
left-hand side or by fixed-point iteration.  All arithmetic runs in complex128;
real inputs keep exactly zero imaginary parts.
"""

import numpy as np


class StepDivergence(RuntimeError):
    """Implicit step failed to converge or the trajectory left the finite range."""


def assemble_lhs(Omega, K0, dt):
    """Constant matrix of the implicit node: I - dt/2 Omega - dt^2/4 K(0)."""
    n = Omega.shape[0]
    return np.eye(n, dtype=complex) - 0.5 * dt * Omega - 0.25 * dt * dt * K0


def _history(Kstack, X, m, dt):
    """Trapezoid weights on the memory integral, excluding the x_m endpoint."""
    H = 0.5 * dt * (Kstack[m] @ X[0])
    if m >= 2:
        H = H + dt * np.einsum("kij,kj->i", Kstack[m - 1:0:-1], X[1:m])
    return H


def volterra_direct(Ainv, Omega, Kstack, R, x0, dt):
    """Stepper with the implicit node solved by the precomputed inverse.

    Returns (X, F) where F stores the right-hand side at each node; the
    trajectory satisfies x_m = x_{m-1} + dt/2 (F_{m-1} + F_m) exactly.
    """
    nT = R.shape[0]
    n = x0.shape[0]
    X = np.zeros((nT, n), dtype=complex)
    F = np.zeros((nT, n), dtype=complex)
    X[0] = x0
    F[0] = Omega @ x0 + R[0]
    K0 = Kstack[0]
    half = 0.5 * dt
    for m in range(1, nT):
        H = _history(Kstack, X, m, dt)
        b = X[m - 1] + half * (F[m - 1] + R[m] + H)
        x = Ainv @ b
        X[m] = x
        F[m] = Omega @ x + R[m] + H + half * (K0 @ x)
    if not np.all(np.isfinite(X.view(float))):
        raise StepDivergence("trajectory left the finite range")
    return X, F


def volterra_fixed_point(Omega, Kstack, R, x0, dt, tol=1e-12, max_iter=50):
    """Stepper resolving the implicit node by fixed-point iteration."""
    nT = R.shape[0]
    n = x0.shape[0]
    X = np.zeros((nT, n), dtype=complex)
    F = np.zeros((nT, n), dtype=complex)
    X[0] = x0
    F[0] = Omega @ x0 + R[0]
    K0 = Kstack[0]
    half = 0.5 * dt
    for m in range(1, nT):
        H = _history(Kstack, X, m, dt)
        base = X[m - 1] + half * (F[m - 1] + R[m] + H)
        x = X[m - 1]
        converged = False
        for _ in range(max_iter):
            xn = base + half * (Omega @ x) + (0.25 * dt * dt) * (K0 @ x)
            delta = np.abs(xn - x).max()
            x = xn
            if not np.isfinite(delta):
                raise StepDivergence(f"fixed-point iteration diverged at node {m}")
            if delta <= tol * max(1.0, np.abs(x).max()):
                converged = True
                break
        if not converged:
            raise StepDivergence(
                f"fixed-point iteration did not reach {tol:g} within "
                f"{max_iter} sweeps at node {m}")
        X[m] = x
        F[m] = Omega @ x + R[m] + H + half * (K0 @ x)
    return X, F
