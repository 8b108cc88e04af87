"""Projection decomposition of linear flows into drift, noise and memory.

For a flow x' = L x and an idempotent P, the Dyson identity

    e^{tL} = e^{tQL} + int_0^t e^{sL} P L e^{(t-s)QL} ds,   Q = 1 - P,

splits the dynamics into drift PLP, a noise term evolving under QL and a
memory kernel PL e^{tau QL} QL.  This module assembles those pieces on a
uniform grid, integrates the resulting Volterra equation with a trapezoidal
stepper (compiled when the extension built, numpy otherwise), and provides the
dual state-picture solver plus consistency checks: the Dyson residual, the
pairing duality between the two pictures, and spectrum summaries.
"""

import numpy as np
from scipy.linalg import expm

from ._volterra import (StepDivergence, assemble_lhs, volterra_direct,
                        volterra_fixed_point)

try:
    from . import _volterra_cy
    HAVE_COMPILED = True
except ImportError:
    _volterra_cy = None
    HAVE_COMPILED = False

IDEMPOTENCE_TOL = 1e-10


class BasisMismatch(ValueError):
    pass


class PairingSingular(np.linalg.LinAlgError):
    pass


def _matrix_of(op):
    return np.asarray(getattr(op, "matrix", op))


class TimeGrid:
    """Uniform grid 0, dt, ..., n_steps * dt."""

    def __init__(self, dt, n_steps):
        dt = float(dt)
        n_steps = int(n_steps)
        if not (dt > 0.0 and np.isfinite(dt)):
            raise ValueError("dt must be positive and finite")
        if n_steps < 1:
            raise ValueError("need at least one step")
        self.dt = dt
        self.n_steps = n_steps
        self.times = np.arange(n_steps + 1) * dt

    @classmethod
    def span(cls, t_max, dt):
        n = int(round(t_max / dt))
        if n < 1 or abs(n * dt - t_max) > 1e-9 * max(1.0, abs(t_max)):
            raise ValueError("t_max must be a positive multiple of dt")
        return cls(dt, n)

    @property
    def t_max(self):
        return float(self.times[-1])

    def __len__(self):
        return self.n_steps + 1


class GLEProblem:
    """Drift, noise and kernel of the projected flow, kept as exact callables."""

    def __init__(self, L, P, x0):
        L = _matrix_of(L)
        P = _matrix_of(P)
        if L.shape != P.shape or L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise BasisMismatch("generator and projection must be square and "
                                "share one basis")
        x0 = np.asarray(x0)
        if x0.shape != (L.shape[0],):
            raise BasisMismatch("initial coordinates do not match the basis")
        dev = np.abs(P @ P - P).max()
        if dev > IDEMPOTENCE_TOL * max(1.0, np.abs(P).max()):
            raise ValueError(f"P is not idempotent (deviation {dev:.2e})")
        self.L = L
        self.P = P
        self.Q = np.eye(L.shape[0]) - P
        self.omega = P @ L @ P
        self.PL = P @ L
        self.QL = self.Q @ L
        self.x0 = x0
        self.dim = L.shape[0]

    def noise(self, t):
        return expm(t * self.QL) @ (self.QL @ self.x0)

    def kernel(self, tau):
        return self.PL @ expm(tau * self.QL) @ self.QL


def assemble_gle(L, P, x0):
    """Split x' = Lx into drift PLP, noise e^{tQL}QLx0 and kernel PLe^{tauQL}QL."""
    return GLEProblem(L, P, x0)


def lag_cache(M, dt, n_steps):
    """Stack of e^{j dt M} for j = 0..n_steps via repeated single-step products."""
    M = np.asarray(M)
    n = M.shape[0]
    E = np.empty((n_steps + 1, n, n), dtype=complex)
    E[0] = np.eye(n)
    E1 = expm(dt * M)
    for j in range(1, n_steps + 1):
        E[j] = E1 @ E[j - 1]
    return E


class KernelTable:
    """Grid-sampled drift, memory kernel and noise for the Volterra stepper."""

    def __init__(self, omega, kstack, rstack, grid):
        omega = np.asarray(omega)
        kstack = np.asarray(kstack)
        rstack = np.asarray(rstack)
        n = omega.shape[0]
        nT = len(grid)
        if kstack.shape != (nT, n, n) or rstack.shape != (nT, n):
            raise BasisMismatch("kernel and noise stacks must cover every grid "
                                "node at the drift dimension")
        self.omega = omega
        self.kstack = kstack
        self.rstack = rstack
        self.grid = grid
        self.dim = n

    @classmethod
    def from_problem(cls, problem, grid):
        E = lag_cache(problem.QL, grid.dt, grid.n_steps)
        kstack = np.einsum("ij,njk,kl->nil", problem.PL, E, problem.QL,
                           optimize=True)
        rstack = np.einsum("nij,j->ni", E, problem.QL @ problem.x0,
                           optimize=True)
        table = cls(problem.omega, kstack, rstack, grid)
        dev = np.abs(kstack[0] - problem.PL @ problem.QL).max()
        if dev > 1e-12 * max(1.0, np.abs(kstack[0]).max()):
            raise AssertionError(f"kernel table violates kernel(0) = PLQL "
                                 f"({dev:.2e})")
        return table


def scalar_kernel_lift(table, x0, tol=1e-9):
    """Replace kernel matrices acting as scalars on x0 by those scalars times 1.

    Valid when kernel(tau) x0 = k(tau) x0 on every lag; then the scalar kernel
    closes the full-coordinate equation whenever the drift vanishes on the
    trajectory components outside the projected span.
    """
    x0 = np.asarray(x0)
    nrm2 = np.vdot(x0, x0).real
    if nrm2 == 0.0:
        raise ValueError("cannot lift against a zero vector")
    kx = table.kstack @ x0
    k = (kx @ x0.conj()) / nrm2
    dev = np.abs(kx - k[:, None] * x0).max()
    scale = max(1.0, np.abs(kx).max())
    if dev > tol * scale:
        raise ValueError(f"kernel does not act as a scalar on the initial "
                         f"coordinates (deviation {dev:.2e})")
    n = table.dim
    kstack = k[:, None, None] * np.eye(n)
    if np.abs(k.imag).max(initial=0.0) == 0.0:
        kstack = kstack.real
    lifted = KernelTable(table.omega, kstack, table.rstack, table.grid)
    lifted.scalar_values = k
    return lifted


class GLESolution:
    """Trajectory on a grid with optional reference curve and step diagnostics."""

    def __init__(self, times, trajectory, labels=None, reference=None,
                 ref_labels=None, diagnostics=None, meta=None):
        self.times = np.asarray(times)
        self.trajectory = np.asarray(trajectory)
        n = self.trajectory.shape[1]
        self.labels = list(labels) if labels is not None else [f"x{i}" for i in range(n)]
        self.reference = None if reference is None else np.asarray(reference)
        self.ref_labels = list(ref_labels) if ref_labels is not None else None
        self.diagnostics = None if diagnostics is None else np.asarray(diagnostics)
        self.meta = dict(meta) if meta else {}

    def max_abs_error(self):
        if self.reference is None:
            return None
        return float(np.abs(self.trajectory - self.reference).max())

    def residual_max(self):
        if self.diagnostics is None:
            return None
        return float(self.diagnostics.max())

    def __repr__(self):
        return (f"GLESolution(nodes={len(self.times)}, "
                f"dim={self.trajectory.shape[1]})")


def _maybe_real(X):
    if np.iscomplexobj(X) and np.abs(X.imag).max(initial=0.0) == 0.0:
        return X.real.copy()
    return X


def solve_volterra(table, x0, grid=None, method="direct", backend=None):
    """Integrate x' = Omega x + R(t) + int_0^t K(t-s) x(s) ds on the grid.

    The trapezoidal scheme is implicit in the final node; "direct" resolves it
    with a precomputed inverse, "fixed_point" iterates to 1e-12 and raises
    StepDivergence on failure.  backend None picks the compiled stepper when
    available.
    """
    grid = table.grid if grid is None else grid
    if len(grid) != len(table.grid) or grid.dt != table.grid.dt:
        raise BasisMismatch("grid does not match the kernel table")
    x0 = np.asarray(x0)
    if x0.shape != (table.dim,):
        raise BasisMismatch("initial coordinates do not match the kernel table")
    if method not in ("direct", "fixed_point"):
        raise ValueError(f"unknown method {method!r}")
    if backend is None:
        backend = "compiled" if (HAVE_COMPILED and method == "direct") else "numpy"
    if backend == "compiled" and not HAVE_COMPILED:
        raise ValueError("compiled stepper requested but the extension is not built")
    if backend not in ("compiled", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")

    Om = np.ascontiguousarray(table.omega, dtype=complex)
    Ks = np.ascontiguousarray(table.kstack, dtype=complex)
    Rs = np.ascontiguousarray(table.rstack, dtype=complex)
    z0 = np.ascontiguousarray(x0, dtype=complex)
    dt = grid.dt

    if method == "fixed_point":
        X, F = volterra_fixed_point(Om, Ks, Rs, z0, dt)
        backend = "numpy"
    else:
        A = assemble_lhs(Om, Ks[0], dt)
        Ainv = np.ascontiguousarray(np.linalg.inv(A))
        if backend == "compiled":
            X, F = _volterra_cy.volterra_direct(Ainv, Om, Ks, Rs, z0, dt)
        else:
            X, F = volterra_direct(Ainv, Om, Ks, Rs, z0, dt)
    if not np.all(np.isfinite(X.view(float))):
        raise StepDivergence("trajectory left the finite range")

    diag = np.zeros(len(grid))
    if len(grid) > 2:
        central = (X[2:] - X[:-2]) / (2.0 * dt)
        diag[1:-1] = np.abs(central - F[1:-1]).max(axis=1)
    meta = {"backend": backend, "method": method,
            "noise_max": float(np.abs(Rs).max())}
    return GLESolution(grid.times, _maybe_real(X), diagnostics=diag, meta=meta)


def image_basis(P, tol=0.5):
    """Orthonormal basis of range(P) for idempotent P (singular vectors above tol)."""
    P = np.asarray(P)
    U, s, _ = np.linalg.svd(P)
    r = int(np.count_nonzero(s > tol))
    W = U[:, :r]
    dev = np.abs(P @ W - W).max()
    if dev > 1e-9:
        raise ValueError(f"matrix is not a projection (range deviation {dev:.2e})")
    return W


def solve_state_nmz(Lstar, Pstar, rho0, grid, reduce=True, method="direct",
                    backend=None):
    """Exact closed equation for sigma(t) = P* e^{tL*} rho0.

    sigma' = P*L* sigma + P*L* e^{tQ*L*} Q* rho0
             + int_0^t P*L* e^{(t-s)Q*L*} Q*L* sigma(s) ds.

    With reduce=True the Volterra solve runs on an orthonormal basis of
    range(P*) and is lifted back, which changes nothing mathematically.
    """
    Ls = _matrix_of(Lstar)
    Ps = _matrix_of(Pstar)
    if Ls.shape != Ps.shape or Ls.ndim != 2 or Ls.shape[0] != Ls.shape[1]:
        raise BasisMismatch("generator and projection must be square and share "
                            "one basis")
    rho0 = np.asarray(rho0)
    N = Ls.shape[0]
    if rho0.shape != (N,):
        raise BasisMismatch("initial state coordinates do not match the basis")
    dev = np.abs(Ps @ Ps - Ps).max()
    if dev > IDEMPOTENCE_TOL * max(1.0, np.abs(Ps).max()):
        raise ValueError(f"P* is not idempotent (deviation {dev:.2e})")

    PL = Ps @ Ls
    QL = (np.eye(N) - Ps) @ Ls
    sigma0 = Ps @ rho0
    q0 = rho0 - sigma0
    E = lag_cache(QL, grid.dt, grid.n_steps)

    if reduce:
        W = image_basis(Ps)
        A = W.conj().T @ PL
        B = QL @ W
        Om = A @ W
        Ks = np.einsum("rn,jnm,ms->jrs", A, E, B, optimize=True)
        Rn = np.einsum("rn,jnm,m->jr", A, E, q0, optimize=True)
        y0 = W.conj().T @ sigma0
        table = KernelTable(Om, Ks, Rn, grid)
        sol = solve_volterra(table, y0, grid, method=method, backend=backend)
        X = sol.trajectory.astype(complex) @ W.T
        meta = dict(sol.meta, reduced=True, rank=W.shape[1])
        out = GLESolution(grid.times, _maybe_real(X),
                          diagnostics=sol.diagnostics, meta=meta)
    else:
        QLP = QL @ Ps
        Om = PL @ Ps
        Ks = np.einsum("ij,njk,kl->nil", PL, E, QLP, optimize=True)
        Rn = np.einsum("ij,njk,k->ni", PL, E, q0, optimize=True)
        table = KernelTable(Om, Ks, Rn, grid)
        sol = solve_volterra(table, sigma0, grid, method=method, backend=backend)
        sol.meta.update(reduced=False, rank=N)
        out = sol
    return out


def dyson_check(L, P, t, n_quad):
    """Max-entry residual of the Dyson identity at time t, composite Simpson."""
    L = _matrix_of(L)
    P = _matrix_of(P)
    if L.shape != P.shape:
        raise BasisMismatch("generator and projection must share one basis")
    if t == 0.0:
        return 0.0
    n_quad = int(n_quad)
    if n_quad < 2 or n_quad % 2 != 0:
        raise ValueError("Simpson rule needs an even, positive interval count")
    QL = (np.eye(L.shape[0]) - P) @ L
    PL = P @ L
    h = t / n_quad
    S = np.zeros_like(L, dtype=complex)
    for k in range(n_quad + 1):
        w = 1.0 if k in (0, n_quad) else (4.0 if k % 2 == 1 else 2.0)
        s = k * h
        S += (w * h / 3.0) * (expm(s * L) @ PL @ expm((t - s) * QL))
    resid = expm(t * L) - expm(t * QL) - S
    return float(np.abs(resid).max())


def duality_check(L, basis, rho0, g0, t_grid):
    """Agreement of forward observable flow and adjoint state flow under the pairing.

    The pairing Gram is built by exact group quadrature over the basis; the
    adjoint is G^{-1} L^T G.  Reports the worst pairing discrepancy over the
    grid, the deviation of the adjoint from -L, and the drift of the pairing
    of the evolved state against the constant function.
    """
    from .algebra import eval as poly_eval
    from .haar import haar_quadrature

    L = _matrix_of(L)
    group = {2: "SU2", 3: "SO3"}.get(basis.dim)
    if group is None:
        raise ValueError(f"no quadrature for basis dimension {basis.dim}")
    mats, w = haar_quadrature(group)
    V = np.stack([poly_eval(e, mats) for e in basis.elements], axis=1)
    if np.abs(V.imag).max(initial=0.0) <= 1e-12 * max(1.0, np.abs(V.real).max()):
        V = V.real
    G = (V * w[:, None]).T @ V
    sv = np.linalg.svd(G, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] / sv[0] < 1e-10:
        raise PairingSingular(
            f"pairing Gram is numerically singular (sv ratio "
            f"{0.0 if sv[0] == 0 else sv[-1] / sv[0]:.2e})")
    Ladj = np.linalg.solve(G, L.T @ G)
    p1 = w @ V
    rho0 = np.asarray(rho0)
    g0 = np.asarray(g0)
    disc = 0.0
    unit_vals = []
    for t in np.asarray(t_grid, dtype=float):
        right_flow = expm(t * L) @ g0
        left_state = expm(t * Ladj) @ rho0
        disc = max(disc, abs(rho0 @ G @ right_flow - left_state @ G @ g0))
        unit_vals.append(left_state @ p1)
    unit_vals = np.asarray(unit_vals)
    return {
        "group": group,
        "gram_condition": float(sv[0] / sv[-1]),
        "adjoint_antisymmetry": float(np.abs(Ladj + L).max()),
        "discrepancy": float(disc),
        "unit_pairing_drift": float(np.abs(unit_vals - unit_vals[0]).max()),
    }


def spectrum_report(L, P):
    """Eigenvalues of L, of the drift PLP and of QL, each sorted by (re, im)."""
    L = _matrix_of(L)
    P = _matrix_of(P)
    if L.shape != P.shape:
        raise BasisMismatch("generator and projection must share one basis")
    Q = np.eye(L.shape[0]) - P
    return {
        "L": np.sort_complex(np.linalg.eigvals(L)),
        "PLP": np.sort_complex(np.linalg.eigvals(P @ L @ P)),
        "QL": np.sort_complex(np.linalg.eigvals(Q @ L)),
    }
