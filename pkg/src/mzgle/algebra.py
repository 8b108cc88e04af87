"""Trace-polynomial observables over matrix groups.

Observables are polynomials in scalar functions U -> Tr(F U) for fixed factor
matrices F.  On SU(2) and SO(3) the linear span of the group is the full matrix
space, so Tr(F U) = Tr(F' U) for all group elements iff F = F'; structural
equality of canonical factor lists therefore equals equality of functions.

The module also applies the Liouvillian derivation of an autonomous linear flow
U' = A U and builds coordinate matrix representations of linear operators over
finite bases.  Matrices act on coefficient columns: if f has coordinates c then
Op f has coordinates matrix @ c.
"""

import numpy as np

PRUNE_EPS = 1e-12
RANK_TOL = 1e-8
_KEY_DIGITS = 12


class DimMismatch(ValueError):
    pass


class RankDeficient(ValueError):
    pass


class BasisNotClosed(ValueError):
    """The image of a basis element leaves the basis span.

    Carries the offending element index and the unmatched monomial (or None
    when the failure is a nonzero least-squares residual over known monomials).
    """

    def __init__(self, element_index, monomial, message=None):
        self.element_index = element_index
        self.monomial = monomial
        super().__init__(message or f"basis element {element_index} maps outside the span "
                                    f"(unmatched monomial: {monomial})")


def _as_array(M):
    a = M.entries if isinstance(M, MatrixC) else np.asarray(M)
    return np.asarray(a, dtype=complex)


class MatrixC:
    """Dense complex square matrix with validated entries."""

    __slots__ = ("entries", "dim")

    def __init__(self, entries):
        a = np.array(entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError("expected a square matrix of dimension >= 1")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        a.setflags(write=False)
        self.entries = a
        self.dim = a.shape[0]

    def __repr__(self):
        return f"MatrixC(dim={self.dim})"


def _canonical_factor(F):
    """Rescale F so its first significant entry (row-major) equals 1.

    Returns (scale, canonical array, hashable key).  Tr(F U) = scale * Tr(C U),
    so the scale belongs to the polynomial coefficient, keeping factor identity
    independent of overall normalization.
    """
    flat = F.ravel()
    mags = np.abs(flat)
    mx = mags.max()
    if mx == 0.0:
        return 0.0, None, None
    idx = int(np.argmax(mags > 1e-12 * mx))
    s = flat[idx]
    C = F / s
    C.setflags(write=False)
    key = tuple((round(v.real, _KEY_DIGITS), round(v.imag, _KEY_DIGITS)) for v in C.ravel())
    return s, C, key


class TraceMonomial:
    """Product of trace factors prod_k Tr(F_k U); empty product is the constant 1.

    Factors are stored canonically normalized and sorted by their serialization
    key, so structural equality is insensitive to insertion order.
    """

    __slots__ = ("dim", "factors", "key")

    def __init__(self, dim, canon_factors):
        # canon_factors: iterable of (key, array) already canonical
        fs = sorted(canon_factors, key=lambda kf: kf[0])
        self.dim = dim
        self.factors = tuple(fs)
        self.key = (dim, tuple(k for k, _ in fs))

    @property
    def degree(self):
        return len(self.factors)

    def factor_arrays(self):
        return [a for _, a in self.factors]

    def __repr__(self):
        return f"TraceMonomial(dim={self.dim}, degree={self.degree})"


def make_monomial(dim, factor_mats):
    """Canonicalize raw factor matrices; returns (scale, TraceMonomial or None).

    A zero factor annihilates the monomial (Tr(0 U) = 0), signalled by None.
    """
    canon = []
    scale = 1.0 + 0.0j
    for F in factor_mats:
        a = _as_array(F)
        if a.shape != (dim, dim):
            raise DimMismatch(f"factor shape {a.shape} does not match dim {dim}")
        s, C, key = _canonical_factor(a)
        if C is None:
            return 0.0, None
        scale *= s
        canon.append((key, C))
    return scale, TraceMonomial(dim, canon)


class TracePolynomial:
    """Finite linear combination of trace monomials with complex coefficients."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim, terms=None):
        self.dim = dim
        self.terms = {}  # key -> [TraceMonomial, coeff]
        if terms:
            for coeff, factor_mats in terms:
                self.add_term(coeff, factor_mats)
            self.prune()

    def add_term(self, coeff, factor_mats):
        s, mono = make_monomial(self.dim, factor_mats)
        if mono is None:
            return self
        self._accumulate(mono, coeff * s)
        return self

    def _accumulate(self, mono, coeff):
        slot = self.terms.get(mono.key)
        if slot is None:
            self.terms[mono.key] = [mono, coeff]
        else:
            slot[1] += coeff

    def prune(self, eps=PRUNE_EPS):
        dead = [k for k, (_, c) in self.terms.items() if abs(c) <= eps]
        for k in dead:
            del self.terms[k]
        return self

    def copy(self):
        p = TracePolynomial(self.dim)
        p.terms = {k: [m, c] for k, (m, c) in self.terms.items()}
        return p

    def scaled(self, a):
        p = TracePolynomial(self.dim)
        p.terms = {k: [m, c * a] for k, (m, c) in self.terms.items()}
        return p.prune()

    def __add__(self, other):
        if self.dim != other.dim:
            raise DimMismatch("polynomial dims differ")
        p = self.copy()
        for m, c in other.terms.values():
            p._accumulate(m, c)
        return p.prune()

    def __sub__(self, other):
        return self + other.scaled(-1.0)

    def __mul__(self, other):
        """Pointwise product; monomial factor lists concatenate."""
        if self.dim != other.dim:
            raise DimMismatch("polynomial dims differ")
        p = TracePolynomial(self.dim)
        for m1, c1 in self.terms.values():
            for m2, c2 in other.terms.values():
                mono = TraceMonomial(self.dim, m1.factors + m2.factors)
                p._accumulate(mono, c1 * c2)
        return p.prune()

    def equals(self, other, tol=1e-10):
        """Structural equality of canonical monomials with coefficient tolerance."""
        if self.dim != other.dim:
            return False
        a, b = self.copy().prune(tol), other.copy().prune(tol)
        if set(a.terms) != set(b.terms):
            return False
        return all(abs(a.terms[k][1] - b.terms[k][1]) <= tol for k in a.terms)

    @property
    def max_degree(self):
        return max((m.degree for m, _ in self.terms.values()), default=0)

    def __repr__(self):
        return f"TracePolynomial(dim={self.dim}, nterms={len(self.terms)})"


def constant(dim, c=1.0):
    p = TracePolynomial(dim)
    p._accumulate(TraceMonomial(dim, []), complex(c))
    return p.prune()


def character(dim):
    """chi(U) = Tr(U) as a trace polynomial."""
    return TracePolynomial(dim, [(1.0, [np.eye(dim)])])


def eval(p, U):  # noqa: A001  (spec-mandated operation name)
    """Evaluate p at a group element U, or at a batch of shape (n, d, d)."""
    a = _as_array(U)
    batched = a.ndim == 3
    d = a.shape[-1]
    if a.ndim not in (2, 3) or a.shape[-2] != d or d != p.dim:
        raise DimMismatch(f"evaluation point shape {a.shape} does not match dim {p.dim}")
    out = np.zeros(a.shape[0] if batched else (), dtype=complex)
    for mono, coeff in p.terms.values():
        term = np.full_like(out, coeff)
        for _, F in mono.factors:
            term = term * np.einsum("ij,...ji->...", F, a)
        out = out + term
    return out if batched else complex(out)


def liouvillian_apply(p, A):
    """Derivation of the flow U' = A U: L Tr(F U) = Tr(F A U), product rule on monomials."""
    a = _as_array(A)
    if a.shape != (p.dim, p.dim):
        raise DimMismatch(f"generator shape {a.shape} does not match dim {p.dim}")
    out = TracePolynomial(p.dim)
    for mono, coeff in p.terms.values():
        mats = mono.factor_arrays()
        for j in range(len(mats)):
            new_mats = list(mats)
            new_mats[j] = mats[j] @ a
            s, m = make_monomial(p.dim, new_mats)
            if m is not None:
                out._accumulate(m, coeff * s)
    return out.prune()


class BasisRep:
    """Ordered basis of trace polynomials with cached sample evaluations.

    When sample points are provided the evaluation matrix is checked for full
    column rank (smallest/largest singular value >= RANK_TOL); the ratio's
    reciprocal is stored as conditionEstimate.  validate=False records the
    estimate without raising, for representations that are kept deliberately
    despite a known dependency.
    """

    def __init__(self, elements, sample_points=None, labels=None, validate=True):
        elements = list(elements)
        if not elements:
            raise ValueError("empty basis")
        dims = {e.dim for e in elements}
        if len(dims) != 1:
            raise DimMismatch("basis elements have mixed dims")
        keysets = [frozenset((k, complex(c)) for k, (_, c) in e.terms.items()) for e in elements]
        if len(set(keysets)) != len(elements):
            raise ValueError("basis elements must be pairwise distinct")
        self.elements = elements
        self.dim = dims.pop()
        self.size = len(elements)
        self.labels = list(labels) if labels is not None else [f"f{i}" for i in range(self.size)]
        self.sampleMatrix = None
        self.conditionEstimate = None
        if sample_points is not None:
            pts = np.asarray(sample_points, dtype=complex)
            S = np.stack([eval(e, pts) for e in elements], axis=1)
            sv = np.linalg.svd(S, compute_uv=False)
            ratio = sv[-1] / sv[0] if sv[0] > 0 else 0.0
            self.sampleMatrix = S
            self.conditionEstimate = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
            if validate and ratio < RANK_TOL:
                raise RankDeficient(
                    f"basis sample matrix is rank deficient (sv ratio {ratio:.2e})")

    def monomial_table(self):
        """All monomials across elements and the monomial-by-element coefficient matrix."""
        keys = {}
        for e in self.elements:
            for k, (m, _) in e.terms.items():
                keys.setdefault(k, m)
        order = sorted(keys)
        B = np.zeros((len(order), self.size), dtype=complex)
        for j, e in enumerate(self.elements):
            for i, k in enumerate(order):
                if k in e.terms:
                    B[i, j] = e.terms[k][1]
        return order, keys, B

    def __len__(self):
        return self.size


class OperatorRep:
    """Matrix of a linear operator over a basis, acting on coefficient columns."""

    __slots__ = ("basis", "matrix", "max_residual")

    def __init__(self, basis, matrix):
        matrix = np.asarray(matrix)
        if basis is not None and matrix.shape != (len(basis), len(basis)):
            raise DimMismatch("matrix dimension does not match basis size")
        self.basis = basis
        self.matrix = matrix
        self.max_residual = None

    def __repr__(self):
        return f"OperatorRep(n={self.matrix.shape[0]})"


def _match_monomial(index, keys, order, mono):
    i = index.get(mono.key)
    if i is not None:
        return i
    # keys quantize canonical entries to 12 digits; products that land within
    # float error of a rounding boundary need an arithmetic comparison instead
    b = mono.factor_arrays()
    for k in order:
        cand = keys[k]
        if cand.degree != mono.degree:
            continue
        a = cand.factor_arrays()
        if all(np.allclose(x, y, rtol=0.0, atol=1e-9) for x, y in zip(a, b)):
            return index[k]
        if len(a) == 2 and np.allclose(a[0], b[1], rtol=0.0, atol=1e-9) \
                and np.allclose(a[1], b[0], rtol=0.0, atol=1e-9):
            return index[k]
    return None


def matrix_rep_exact(op_action, basis):
    """Coordinate matrix of op_action by exact monomial matching.

    Every monomial of op_action(element) must already occur among the basis
    monomials, and the least-squares expansion over basis elements must leave
    zero residual; otherwise BasisNotClosed identifies the offender.
    """
    order, keys, B = basis.monomial_table()
    index = {k: i for i, k in enumerate(order)}
    n = len(basis)
    M = np.zeros((n, n), dtype=complex)
    for j, e in enumerate(basis.elements):
        img = op_action(e)
        v = np.zeros(len(order), dtype=complex)
        for k, (m, c) in img.terms.items():
            i = _match_monomial(index, keys, order, m)
            if i is None:
                raise BasisNotClosed(j, m)
            v[i] += c
        coef, *_ = np.linalg.lstsq(B, v, rcond=None)
        resid = B @ coef - v
        scale = max(1.0, np.abs(v).max(initial=0.0))
        if np.abs(resid).max(initial=0.0) > 1e-10 * scale:
            worst = order[int(np.argmax(np.abs(resid)))]
            raise BasisNotClosed(j, keys[worst],
                                 f"element {j}: image not expressible in the basis "
                                 f"(residual {np.abs(resid).max():.2e})")
        M[:, j] = coef
    if np.abs(M.imag).max(initial=0.0) <= 1e-13 * max(1.0, np.abs(M.real).max()):
        M = M.real.copy()
    return OperatorRep(basis, M)


def matrix_rep_collocation(op_evaluator, basis, sampler, n_samples, tol):
    """Least-squares coordinate matrix from pointwise evaluations of the operator.

    op_evaluator(f, Us) must return the values of (Op f) at the stacked sample
    matrices Us.  Requires n_samples >= 4 * len(basis).
    """
    n = len(basis)
    if n_samples < 4 * n:
        raise ValueError(f"need at least {4 * n} samples for a {n}-element basis")
    Us = sampler.matrices(0, n_samples)
    S = np.stack([eval(e, Us) for e in basis.elements], axis=1)
    sv = np.linalg.svd(S, compute_uv=False)
    if sv[0] == 0 or sv[-1] / sv[0] < RANK_TOL:
        raise RankDeficient(f"collocation sample matrix lost rank (sv ratio "
                            f"{0.0 if sv[0] == 0 else sv[-1] / sv[0]:.2e})")
    M = np.zeros((n, n), dtype=complex)
    worst = 0.0
    for j, e in enumerate(basis.elements):
        y = op_evaluator(e, Us)
        coef, *_ = np.linalg.lstsq(S, y, rcond=None)
        resid = np.abs(S @ coef - y).max(initial=0.0)
        scale = max(1.0, np.abs(y).max(initial=0.0))
        if resid > tol * scale:
            raise BasisNotClosed(j, None,
                                 f"element {j}: collocation residual {resid:.2e} "
                                 f"exceeds tol {tol:.2e}")
        worst = max(worst, resid / scale)
        M[:, j] = coef
    if np.abs(M.imag).max(initial=0.0) <= 1e-10 * max(1.0, np.abs(M.real).max()):
        M = M.real.copy()
    op = OperatorRep(basis, M)
    op.max_residual = worst
    return op
