"""Conditional expectation constructors on finite spaces and matrix algebras.

Three constructors produce idempotent projections P together with their
preduals: level-set averaging on a finite measure space, a tensor-factor
average against a fixed marginal, and the quantum partial trace against a
fixed environment state.  A common verifier checks the conditional-expectation
axioms and a norm-increasing negative control demonstrates that idempotence
alone does not imply them.

Discrete operators pair functions against densities by plain summation, so
preduals are transposes.  Superoperators act on column-stacked matrices and
pair via the trace.
"""

import numpy as np


class EmptySpace(ValueError):
    pass


class NotNormalized(ValueError):
    pass


class InvalidDensityMatrix(ValueError):
    pass


IDEMPOTENCE_TOL = 1e-10


def vec(M):
    """Column-stacking vectorization."""
    return np.asarray(M).ravel(order="F")


def unvec(v, rows, cols=None):
    cols = rows if cols is None else cols
    return np.asarray(v).reshape((rows, cols), order="F")


def ptrace_B(X, dA, dB):
    """Partial trace over the second tensor factor (composite index a*dB + b)."""
    return np.einsum("abcb->ac", np.asarray(X).reshape(dA, dB, dA, dB))


class FiniteMeasureSpace:
    """Finite set of points carrying strictly positive weights."""

    def __init__(self, points, weights):
        points = np.asarray(points)
        if points.shape[0] == 0:
            raise EmptySpace("measure space has no points")
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (points.shape[0],):
            raise ValueError("one weight per point required")
        if not np.all(np.isfinite(weights)) or weights.min() <= 0.0:
            raise ValueError("weights must be strictly positive and finite")
        self.points = points
        self.weights = weights
        self.size = points.shape[0]

    def __len__(self):
        return self.size


class FiniteObservable:
    """Real- or complex-valued function on a finite measure space."""

    def __init__(self, space, values):
        values = np.asarray(values)
        if values.shape != (space.size,):
            raise ValueError("one value per point required")
        self.space = space
        self.values = values


class ProjectionOp:
    """Idempotent linear map with its predual and pairing metadata.

    dims is None for maps on functions and (dA, dB) for superoperators on
    column-stacked matrices.  tau_vec implements the compatible faithful state
    as a covector, unit_vec the coordinates of the unit element.
    """

    def __init__(self, matrix, predual, kind, tau_vec, unit_vec, dims=None,
                 is_control=False):
        matrix = np.asarray(matrix)
        predual = np.asarray(predual)
        scale = max(1.0, np.abs(matrix).max())
        dev = np.abs(matrix @ matrix - matrix).max()
        if dev > IDEMPOTENCE_TOL * scale:
            raise ValueError(f"map is not idempotent (deviation {dev:.2e})")
        dev_st = np.abs(predual @ predual - predual).max()
        if dev_st > IDEMPOTENCE_TOL * max(1.0, np.abs(predual).max()):
            raise ValueError(f"predual is not idempotent (deviation {dev_st:.2e})")
        self.matrix = matrix
        self.predual = predual
        self.kind = kind
        self.tau_vec = np.asarray(tau_vec)
        self.unit_vec = np.asarray(unit_vec)
        self.dims = dims
        self.is_control = is_control
        self.size = matrix.shape[0]

    def complement_sup_norm(self):
        """Induced sup-norm of Q = 1 - P (max absolute row sum)."""
        Q = np.eye(self.size) - self.matrix
        return float(np.abs(Q).sum(axis=1).max())

    def __repr__(self):
        return f"ProjectionOp(kind={self.kind!r}, size={self.size})"


# ---------------------------------------------------------------------------
# constructors


def _transitive_bins(values, tol):
    """Chain values into bins: consecutive sorted values within tol share a bin."""
    order = np.argsort(values, kind="stable")
    sv = values[order]
    labels = np.empty(len(values), dtype=int)
    b = 0
    labels[order[0]] = 0
    for i in range(1, len(sv)):
        if sv[i] - sv[i - 1] > tol:
            b += 1
        labels[order[i]] = b
    return labels, b + 1


def condexp_level_sets(space, h, bin_tol=None):
    """Conditional expectation onto the level sets of h.

    Values of h closer than bin_tol are chained into one bin (the relation is
    made transitive), default tolerance 1e-9 times the value range.
    """
    vals = h.values if isinstance(h, FiniteObservable) else np.asarray(h)
    if vals.shape != (space.size,):
        raise ValueError("observable does not match the space")
    if np.iscomplexobj(vals):
        raise ValueError("level-set binning needs real values")
    rng_h = float(vals.max() - vals.min())
    if bin_tol is None:
        bin_tol = 1e-9 * rng_h
    labels, nbins = _transitive_bins(np.asarray(vals, dtype=float), bin_tol)
    n = space.size
    P = np.zeros((n, n))
    for b in range(nbins):
        idx = labels == b
        wb = space.weights[idx]
        P[np.ix_(idx, idx)] = wb / wb.sum()
    tau = space.weights / space.weights.sum()
    op = ProjectionOp(P, P.T.copy(), "level_sets", tau, np.ones(n))
    op.bin_labels = labels
    op.n_bins = nbins
    return op


def condexp_tensor(space_n, space_r, p):
    """Average over the second tensor factor against the marginal p.

    Returns (pi, K, P) with pi the factor average, K the lift g -> g x 1 and
    P = K pi.  The product space is indexed row-major: (x, y) -> x*nR + y.
    """
    p = np.asarray(p, dtype=float)
    nN, nR = space_n.size, space_r.size
    if p.shape != (nR,):
        raise ValueError("marginal does not match the second space")
    if p.min() <= 0.0 or abs(p.sum() - 1.0) > 1e-12:
        raise NotNormalized("marginal must be strictly positive and sum to 1")
    pi = np.zeros((nN, nN * nR))
    K = np.zeros((nN * nR, nN))
    for x in range(nN):
        pi[x, x * nR:(x + 1) * nR] = p
        K[x * nR:(x + 1) * nR, x] = 1.0
    P = K @ pi
    wN = space_n.weights / space_n.weights.sum()
    tau = np.kron(wN, p)
    op = ProjectionOp(P, P.T.copy(), "tensor", tau, np.ones(nN * nR))
    return pi, K, op


def _check_density(rho, tol=1e-12):
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidDensityMatrix("density matrix must be square")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise InvalidDensityMatrix("density matrix must be Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol or abs(np.trace(rho).imag) > tol:
        raise InvalidDensityMatrix("density matrix must have unit trace")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise InvalidDensityMatrix("density matrix must be positive semidefinite")
    return rho


def condexp_partial_trace(dA, dB, rhoB):
    """Conditional expectation onto operators of the A factor.

    pi(X) = Tr_B(X (1 x rhoB)) on vec coordinates, K(A) = A x 1, P = K pi.
    The predual is P_*(rho) = Tr_B(rho) x rhoB.  Returns (pi, K, P).
    """
    rhoB = _check_density(np.asarray(rhoB))
    if rhoB.shape != (dB, dB):
        raise InvalidDensityMatrix(f"environment state must be {dB} x {dB}")
    n = dA * dB
    N = n * n
    IB = np.eye(dB)
    win = np.kron(np.eye(dA), rhoB)
    pi = np.zeros((dA * dA, N), dtype=complex)
    Pst = np.zeros((N, N), dtype=complex)
    for k in range(N):
        E = np.zeros((n, n), dtype=complex)
        E[k % n, k // n] = 1.0
        pi[:, k] = vec(ptrace_B(E @ win, dA, dB))
        Pst[:, k] = vec(np.kron(ptrace_B(E, dA, dB), rhoB))
    K = np.zeros((N, dA * dA), dtype=complex)
    for k in range(dA * dA):
        G = np.zeros((dA, dA), dtype=complex)
        G[k % dA, k // dA] = 1.0
        K[:, k] = vec(np.kron(G, IB))
    P = K @ pi
    W = np.kron(np.eye(dA) / dA, rhoB)
    op = ProjectionOp(P, Pst, "partial_trace", vec(W.T), vec(np.eye(n)),
                      dims=(dA, dB))
    return pi, K, op


# ---------------------------------------------------------------------------
# verification


def _random_hermitian(rng, n):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (A + A.conj().T) / 2.0


def _axiom_deviations(P, trials, seed):
    rng = np.random.default_rng(seed)
    M = P.matrix
    dev = {
        "idempotence": float(np.abs(M @ M - M).max()),
        "unitality": float(np.abs(M @ P.unit_vec - P.unit_vec).max()),
        "positivity": 0.0,
        "contractivity": 0.0,
        "module": 0.0,
        "tracial": 0.0,
    }
    if P.dims is None:
        n = P.size
        for _ in range(trials):
            f = rng.standard_normal(n)
            g = rng.standard_normal(n)
            fp = rng.uniform(0.0, 1.0, n)
            Pf, Pg = M @ f, M @ g
            dev["positivity"] = max(dev["positivity"], float(-(M @ fp).min()))
            dev["contractivity"] = max(
                dev["contractivity"],
                float(np.abs(Pf).max() - np.abs(f).max()) / np.abs(f).max())
            dev["module"] = max(dev["module"],
                                float(np.abs(M @ (f * Pg) - Pf * Pg).max()))
            dev["tracial"] = max(dev["tracial"],
                                 float(abs(P.tau_vec @ Pf - P.tau_vec @ f)))
    else:
        dA, dB = P.dims
        n = dA * dB
        for _ in range(trials):
            X = _random_hermitian(rng, n)
            Y = _random_hermitian(rng, n)
            B = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
            Xp = B @ B.conj().T
            Xp /= np.trace(Xp).real
            PX = unvec(M @ vec(X), n)
            PY = unvec(M @ vec(Y), n)
            PXp = unvec(M @ vec(Xp), n)
            dev["positivity"] = max(
                dev["positivity"],
                float(-np.linalg.eigvalsh((PXp + PXp.conj().T) / 2).min()))
            nX = np.linalg.norm(X, 2)
            dev["contractivity"] = max(
                dev["contractivity"], float((np.linalg.norm(PX, 2) - nX) / nX))
            dev["module"] = max(
                dev["module"],
                float(np.abs(unvec(M @ vec(X @ PY), n) - PX @ PY).max()))
            dev["tracial"] = max(
                dev["tracial"],
                float(abs(P.tau_vec @ (M @ vec(X)) - P.tau_vec @ vec(X))))
    return dev


def negative_control(P):
    """Idempotent comparator R f = f - tau(f) e over a non-constant image element e.

    R reproduces the image normalization (tau(Rf) = 0 makes it idempotent) yet
    violates positivity and unitality, so the axiom battery must reject it.
    """
    n = P.size
    if P.dims is None:
        candidates = list(np.argsort(-np.abs(P.tau_vec)))
    else:
        m = P.dims[0] * P.dims[1]
        # vec indices of the diagonal matrix units, whose images stay Hermitian
        candidates = [i * (m + 1) for i in range(m)]
    u = P.unit_vec.astype(complex)
    uu = (u.conj() @ u).real
    for k in candidates:
        col = P.matrix[:, int(k)].copy()
        t = P.tau_vec @ col
        if abs(t) < 1e-12:
            continue
        dev = col - u * ((u.conj() @ col) / uu)
        if np.abs(dev).max() <= 1e-8 * max(1.0, np.abs(col).max()):
            continue
        e = col / t
        R = np.eye(n, dtype=complex) - np.outer(e, P.tau_vec)
        if P.dims is None:
            Rst = np.eye(n) - np.outer(P.tau_vec, e)
            if np.abs(R.imag).max() == 0.0:
                R = R.real
                Rst = Rst.real
        else:
            dA, dB = P.dims
            m = dA * dB
            W = unvec(P.tau_vec, m).T  # tau_vec = vec(W^T)
            E = unvec(e, m)
            Rst = np.eye(n, dtype=complex) - np.outer(vec(W), vec(E.T).conj())
        return ProjectionOp(R, Rst, P.kind, P.tau_vec, P.unit_vec, dims=P.dims,
                            is_control=True)
    raise ValueError("projection has no usable non-constant image element")


def verify_condexp_axioms(P, trials=200, seed=0):
    """Check the conditional-expectation axioms on random inputs.

    Reports per-axiom worst deviations, a pass flag at the 1e-10 gate, and the
    result of running the same battery on the built-in negative control.
    """
    dev = _axiom_deviations(P, trials, seed)
    report = {
        "kind": P.kind,
        "trials": trials,
        "deviations": dev,
        "max_deviation": max(dev.values()),
        "pass": max(dev.values()) <= 1e-10,
    }
    if not P.is_control:
        try:
            R = negative_control(P)
            rdev = _axiom_deviations(R, min(trials, 50), seed + 1)
            violated = [k for k, v in rdev.items() if v > 1e-8]
            report["negative_control"] = {
                "built": True,
                "violated": violated,
                "fails": bool(violated),
            }
        except ValueError:
            report["negative_control"] = {"built": False}
    return report


def verify_state_preservation(P, trials=200, seed=0):
    """True when the predual maps states to states (1e-10 gate)."""
    rng = np.random.default_rng(seed)
    tol = 1e-10
    if P.dims is None:
        n = P.size
        probes = [np.eye(n)[k] for k in range(min(n, 32))]
        for _ in range(trials):
            psi = rng.uniform(0.0, 1.0, n)
            probes.append(psi / psi.sum())
        for psi in probes:
            phi = P.predual @ psi
            if np.abs(np.asarray(phi).imag).max(initial=0.0) > tol:
                return False
            phi = np.asarray(phi).real
            if phi.min() < -tol or abs(phi.sum() - psi.sum()) > tol:
                return False
        return True
    dA, dB = P.dims
    n = dA * dB
    probes = []
    eye = np.eye(n)
    for k in range(n):
        probes.append(np.outer(eye[k], eye[k]).astype(complex))
    for _ in range(trials):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v /= np.linalg.norm(v)
        probes.append(np.outer(v, v.conj()))
        B = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        rho = B @ B.conj().T
        probes.append(rho / np.trace(rho).real)
    for rho in probes:
        out = unvec(P.predual @ vec(rho), n)
        if np.abs(out - out.conj().T).max() > tol:
            return False
        if abs(np.trace(out).real - np.trace(rho).real) > tol:
            return False
        if np.linalg.eigvalsh((out + out.conj().T) / 2).min() < -tol:
            return False
    return True


# ---------------------------------------------------------------------------
# complement norm demo


def torus_q_norm_demo(n, grid_size=4096):
    """Sup norm of Q f_n for f_n(s2) = -1 + 2 exp(-n^2 (s2-1/2)^2 / 2) on the torus.

    P averages over s2, so Q f_n = f_n - mean(f_n).  The peak narrows as n
    grows and the sup norm climbs toward the generic bound 2.
    """
    if grid_size < 8:
        raise ValueError("grid too small")
    s = np.arange(grid_size) / grid_size
    f = -1.0 + 2.0 * np.exp(-(float(n) ** 2) * (s - 0.5) ** 2 / 2.0)
    labels, nbins = _transitive_bins(np.zeros(grid_size), 0.0)
    if nbins != 1:
        raise AssertionError("constant observable must give a single level set")
    w = np.full(grid_size, 1.0 / grid_size)
    pf = float(w @ f)
    return float(np.abs(f - pf).max())
