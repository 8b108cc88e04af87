"""Haar averages over SU(2) and SO(3).

Conjugation averages of trace polynomials reduce to Weingarten sums.  The
degree-2 pairing Gram matrices are built at import time by loop counting and
inverted exactly over the rationals; Monte-Carlo estimators use a counter-based
generator so sample i is reproducible in isolation.
"""

from fractions import Fraction
from itertools import permutations

import numpy as np
from numpy.random import Philox

from .algebra import TracePolynomial, DimMismatch

GROUPS = ("SU2", "SO3")
GROUP_DIM = {"SU2": 2, "SO3": 3}


class UnsupportedOrder(ValueError):
    """Conjugation average requested beyond the tabulated pairing degree."""


def _check_group(group):
    if group not in GROUPS:
        raise ValueError(f"unknown group {group!r}; expected one of {GROUPS}")
    return GROUP_DIM[group]


# ---------------------------------------------------------------------------
# quaternion parametrization


def su2_from_quaternion(q):
    """Unit quaternion(s) (a,b,c,d) -> SU(2) matrix [[a+id, c+ib], [-c+ib, a-id]]."""
    q = np.asarray(q, dtype=float)
    a, b, c, d = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    U = np.empty(q.shape[:-1] + (2, 2), dtype=complex)
    U[..., 0, 0] = a + 1j * d
    U[..., 0, 1] = c + 1j * b
    U[..., 1, 0] = -c + 1j * b
    U[..., 1, 1] = a - 1j * d
    return U


def so3_from_quaternion(q):
    """Unit quaternion(s) -> rotation matrix via the Euler-Rodrigues formula."""
    q = np.asarray(q, dtype=float)
    a, b, c, d = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    R = np.empty(q.shape[:-1] + (3, 3), dtype=float)
    R[..., 0, 0] = a * a + b * b - c * c - d * d
    R[..., 0, 1] = 2 * (b * c - a * d)
    R[..., 0, 2] = 2 * (b * d + a * c)
    R[..., 1, 0] = 2 * (b * c + a * d)
    R[..., 1, 1] = a * a - b * b + c * c - d * d
    R[..., 1, 2] = 2 * (c * d - a * b)
    R[..., 2, 0] = 2 * (b * d - a * c)
    R[..., 2, 1] = 2 * (c * d + a * b)
    R[..., 2, 2] = a * a - b * b - c * c + d * d
    return R


class GroupSampler:
    """Haar sampler indexed by sample number.

    Sample i consumes exactly the i-th 4-word Philox block of the stream keyed
    by master_seed, so batches taken from different shards never overlap and
    sample_su2(s, i) equals row i of any batch containing it.
    """

    def __init__(self, group, master_seed):
        self.dim = _check_group(group)
        self.group = group
        self.master_seed = int(master_seed)

    def quaternions(self, start, n):
        """n unit quaternions for sample indices start..start+n-1."""
        bg = Philox(key=self.master_seed, counter=[int(start), 0, 0, 0])
        raw = bg.random_raw(4 * n).reshape(n, 4)
        # top 53 bits, shifted into (0, 1] so the Box-Muller log never sees 0
        u = ((raw >> np.uint64(11)) + np.uint64(1)) * 2.0 ** -53
        r1 = np.sqrt(-2.0 * np.log(u[:, 0]))
        r2 = np.sqrt(-2.0 * np.log(u[:, 2]))
        t1 = 2.0 * np.pi * u[:, 1]
        t2 = 2.0 * np.pi * u[:, 3]
        q = np.stack([r1 * np.cos(t1), r1 * np.sin(t1),
                      r2 * np.cos(t2), r2 * np.sin(t2)], axis=1)
        nrm = np.linalg.norm(q, axis=1)
        degenerate = nrm == 0.0
        if degenerate.any():
            q[degenerate] = (1.0, 0.0, 0.0, 0.0)
            nrm[degenerate] = 1.0
        return q / nrm[:, None]

    def matrices(self, start, n):
        q = self.quaternions(start, n)
        return su2_from_quaternion(q) if self.group == "SU2" else so3_from_quaternion(q)


def sample_su2(sampler, i):
    if sampler.group != "SU2":
        raise ValueError("sampler is not configured for SU2")
    U = sampler.matrices(i, 1)[0]
    dev = np.abs(U @ U.conj().T - np.eye(2)).max()
    if dev > 1e-12 or abs(np.linalg.det(U) - 1.0) > 1e-12:
        raise AssertionError(f"generated matrix violates SU(2) constraints ({dev:.2e})")
    return U


def sample_so3(sampler, i):
    if sampler.group != "SO3":
        raise ValueError("sampler is not configured for SO3")
    R = sampler.matrices(i, 1)[0]
    dev = np.abs(R @ R.T - np.eye(3)).max()
    if dev > 1e-12 or abs(np.linalg.det(R) - 1.0) > 1e-12:
        raise AssertionError(f"generated matrix violates SO(3) constraints ({dev:.2e})")
    return R


# ---------------------------------------------------------------------------
# exact quadrature on the unit quaternion sphere


def haar_quadrature(group, nu=14, nv=14, nphi=28):
    """Product quadrature on S^3, exact for quaternion polynomials of high degree.

    Returns (matrices, weights) with weights summing to 1.  Coordinates:
    a = u with Chebyshev (second kind) nodes, b = rho*v with Legendre nodes,
    (c, d) = rho*sqrt(1-v^2)*(cos phi, sin phi) with a uniform angle grid.
    """
    _check_group(group)
    k = np.arange(1, nu + 1)
    un = np.cos(k * np.pi / (nu + 1))
    uw = (np.pi / (nu + 1)) * np.sin(k * np.pi / (nu + 1)) ** 2
    vn, vw = np.polynomial.legendre.leggauss(nv)
    ph = 2.0 * np.pi * np.arange(nphi) / nphi
    pw = 2.0 * np.pi / nphi

    U, V, PH = np.meshgrid(un, vn, ph, indexing="ij")
    W = (uw[:, None, None] * vw[None, :, None] * np.full(nphi, pw)) \
        / (2.0 * np.pi ** 2)
    rho = np.sqrt(np.clip(1.0 - U ** 2, 0.0, None))
    r2 = rho * np.sqrt(np.clip(1.0 - V ** 2, 0.0, None))
    q = np.stack([U, rho * V, r2 * np.cos(PH), r2 * np.sin(PH)], axis=-1).reshape(-1, 4)
    w = W.reshape(-1)
    mats = su2_from_quaternion(q) if group == "SU2" else so3_from_quaternion(q)
    return mats, w


# ---------------------------------------------------------------------------
# Weingarten tables (degree 2)


def _cycle_count(perm):
    seen = [False] * len(perm)
    count = 0
    for i in range(len(perm)):
        if not seen[i]:
            count += 1
            j = i
            while not seen[j]:
                seen[j] = True
                j = perm[j]
    return count


def _loop_count(p, q):
    # p, q: perfect matchings on {0..3} as tuples of pairs; loops of their union
    adj = {}
    for (x, y) in p:
        adj.setdefault(x, []).append(y)
        adj.setdefault(y, []).append(x)
    for (x, y) in q:
        adj.setdefault(x, []).append(y)
        adj.setdefault(y, []).append(x)
    seen = set()
    loops = 0
    for start in adj:
        if start in seen:
            continue
        loops += 1
        stack = [start]
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            stack.extend(adj[node])
    return loops


def _fraction_inverse(G):
    n = len(G)
    A = [[Fraction(G[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
         for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        pv = A[col][col]
        A[col] = [x / pv for x in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return [row[n:] for row in A]


class MomentTable:
    """Degree-2 pairing Gram and its exact rational inverse (the weights)."""

    def __init__(self, group):
        d = _check_group(group)
        self.group = group
        self.dim = d
        if group == "SU2":
            # balanced degree-(2,2) monomials in (U, conj U) integrate as over U(2)
            perms = [tuple(p) for p in permutations(range(2))]
            self.labels = ["id", "swap"]
            inv = {t: tuple(t.index(i) for i in range(2)) for t in perms}
            self.gram = [[Fraction(d ** _cycle_count(tuple(s[inv[t][i]] for i in range(2))))
                          for t in perms] for s in perms]
        else:
            # even-degree monomials in O integrate as over O(3)
            pairings = [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))]
            self.labels = ["(01)(23)", "(02)(13)", "(03)(12)"]
            self.gram = [[Fraction(d ** _loop_count(p, q)) for q in pairings]
                         for p in pairings]
        self.weights = _fraction_inverse(self.gram)
        self.gram_f = np.array([[float(x) for x in row] for row in self.gram])
        self.weights_f = np.array([[float(x) for x in row] for row in self.weights])


MOMENT_TABLES = {g: MomentTable(g) for g in GROUPS}


def _pair_contractions(A, B, group):
    """Trace contractions of (A, B), ordered to match the MomentTable pairings."""
    if group == "SU2":
        return np.array([np.trace(A) * np.trace(B), np.trace(A @ B)], dtype=complex)
    return np.array([np.trace(A) * np.trace(B), np.trace(A @ B.T), np.trace(A @ B)],
                    dtype=complex)


def conj_moment1(M, group):
    """Average of Omega M Omega^dag over the group: exactly (Tr M / d) * I."""
    d = _check_group(group)
    M = np.asarray(M, dtype=complex)
    if M.shape != (d, d):
        raise DimMismatch(f"matrix shape {M.shape} does not match group dimension {d}")
    return (np.trace(M) / d) * np.eye(d)


def conj_moment2(A, M, B, N, group):
    """Average of Tr(A Omega M Omega^dag) Tr(B Omega N Omega^dag) over the group."""
    d = _check_group(group)
    for X in (A, M, B, N):
        if np.asarray(X).shape != (d, d):
            raise DimMismatch("all four matrices must match the group dimension")
    table = MOMENT_TABLES[group]
    s = _pair_contractions(np.asarray(A, complex), np.asarray(B, complex), group)
    u = _pair_contractions(np.asarray(M, complex), np.asarray(N, complex), group)
    return complex(s @ table.weights_f @ u)


# ---------------------------------------------------------------------------
# class projection


def _chi_power_poly(dim, data):
    """Polynomial from {power: coeff} over chi^k monomials."""
    p = TracePolynomial(dim)
    for k, c in data.items():
        if c != 0:
            p.add_term(c, [np.eye(dim)] * k)
    return p.prune()

def _is_identity(F, d):
    return F.shape == (d, d) and np.abs(F - np.eye(d)).max() <= 1e-12


def class_project(p, group):
    """Conjugation average of a trace polynomial, expressed in powers of chi = Tr(U).

    Identity-proportional factors are class functions and factor out of the
    average; at most two non-identity factors per monomial are supported.
    """
    d = _check_group(group)
    if p.dim != d:
        raise DimMismatch(f"polynomial dim {p.dim} does not match group dimension {d}")
    table = MOMENT_TABLES[group]
    acc = {}
    for mono, coeff in p.terms.values():
        chi_pow = 0
        rest = []
        for _, F in mono.factors:
            if _is_identity(F, d):
                chi_pow += 1
            else:
                rest.append(F)
        if len(rest) == 0:
            acc[chi_pow] = acc.get(chi_pow, 0) + coeff
        elif len(rest) == 1:
            c = coeff * np.trace(rest[0]) / d
            acc[chi_pow + 1] = acc.get(chi_pow + 1, 0) + c
        elif len(rest) == 2:
            w = _pair_contractions(rest[0], rest[1], group) @ table.weights_f
            if group == "SU2":
                # pair averages of (U, U): [chi^2, chi^2 - 2]
                terms = {chi_pow + 2: w[0] + w[1], chi_pow: -2 * w[1]}
            else:
                # pair averages of (O, O): [chi^2, 3, chi^2 - 2 chi]
                terms = {chi_pow + 2: w[0] + w[2], chi_pow + 1: -2 * w[2],
                         chi_pow: 3 * w[1]}
            for k, c in terms.items():
                acc[k] = acc.get(k, 0) + coeff * c
        else:
            raise UnsupportedOrder(
                f"monomial has {len(rest)} non-scalar trace factors; only "
                f"degree <= 2 conjugation averages are tabulated")
    return _chi_power_poly(d, acc)


def mc_conj_moment2(A, M, B, N, group, sampler, n_samples, n_batches=10):
    """Monte-Carlo counterpart of conj_moment2; returns (estimate, stderr)."""
    d = _check_group(group)
    Om = sampler.matrices(0, n_samples)
    Omc = Om.conj()
    t1 = np.einsum("ij,njk,kl,nil->n", np.asarray(A, complex), Om,
                   np.asarray(M, complex), Omc, optimize=True)
    t2 = np.einsum("ij,njk,kl,nil->n", np.asarray(B, complex), Om,
                   np.asarray(N, complex), Omc, optimize=True)
    vals = t1 * t2
    means = np.array([chunk.mean() for chunk in np.array_split(vals, n_batches)])
    se = np.sqrt((np.var(means.real, ddof=1) + np.var(means.imag, ddof=1)) / n_batches)
    return complex(vals.mean()), float(se)


def mc_class_project(p, group, n_samples, sampler, n_batches=10, n_fit=24):
    """Monte-Carlo conjugation average fitted onto powers of chi.

    Returns (polynomial, stderr) where stderr maps chi power -> batch standard
    error of the fitted coefficient.  Needs n_samples >= 1000.
    """
    from .algebra import BasisNotClosed

    d = _check_group(group)
    if p.dim != d:
        raise DimMismatch(f"polynomial dim {p.dim} does not match group dimension {d}")
    if n_samples < 1000:
        raise ValueError("Monte-Carlo class projection needs at least 1000 samples")
    kmax = p.max_degree
    Om = sampler.matrices(0, n_samples)
    Omc = Om.conj().transpose(0, 2, 1)
    # deterministic fit points from a far shard of the same stream
    fit = sampler.matrices(2 ** 48, n_fit)
    vals = np.zeros((n_samples, n_fit), dtype=complex)
    for mono, coeff in p.terms.values():
        term = np.full((n_samples, n_fit), coeff, dtype=complex)
        for _, F in mono.factors:
            # Tr(F Om U Om^dag) = Tr((Om^dag F Om) U)
            G = Omc @ F @ Om
            term = term * np.einsum("nij,mji->nm", G, fit, optimize=True)
        vals += term
    chi = np.einsum("mii->m", fit)
    V = np.vander(chi, kmax + 1, increasing=True)
    batch_coeffs = []
    for chunk in np.array_split(vals, n_batches):
        c, *_ = np.linalg.lstsq(V, chunk.mean(axis=0), rcond=None)
        batch_coeffs.append(c)
    batch_coeffs = np.array(batch_coeffs)
    mean_vals = vals.mean(axis=0)
    coeffs, *_ = np.linalg.lstsq(V, mean_vals, rcond=None)
    resid = np.abs(V @ coeffs - mean_vals).max()
    se = np.sqrt((batch_coeffs.real.var(axis=0, ddof=1)
                  + batch_coeffs.imag.var(axis=0, ddof=1)) / n_batches)
    noise = max(1e-8, 10.0 * se.max() * max(1.0, np.abs(V).max()))
    if resid > noise * max(1.0, np.abs(mean_vals).max()):
        raise BasisNotClosed(-1, None,
                             f"conjugation average does not close over chi powers "
                             f"<= {kmax} (residual {resid:.2e})")
    poly = _chi_power_poly(d, {k: coeffs[k] for k in range(kmax + 1)})
    stderr = {k: float(se[k]) for k in range(kmax + 1)}
    return poly, stderr
