"""Trace-polynomial algebra: canonicalization, arithmetic, representations."""

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import expm

from mzgle.algebra import (BasisNotClosed, BasisRep, DimMismatch, MatrixC,
                           RankDeficient, TracePolynomial, character, constant,
                           liouvillian_apply, matrix_rep_collocation,
                           matrix_rep_exact)
from mzgle.algebra import eval as poly_eval
from mzgle.demos import su2_observable_basis, su2_observable_matrices
from mzgle.haar import GroupSampler


def rand_mats(rng, n, d):
    return rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))


def test_matrixc_validates_and_freezes():
    M = MatrixC([[1.0, 0.0], [0.0, 1.0]])
    assert M.dim == 2
    with pytest.raises(ValueError):
        MatrixC(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        MatrixC([[np.inf, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        M.entries[0, 0] = 5.0


def test_canonical_scale_absorbed_into_coefficient():
    rng = np.random.default_rng(0)
    F = rng.standard_normal((3, 3))
    p = TracePolynomial(3, [(2.0, [F])])
    q = TracePolynomial(3, [(2.0 * 3.7, [F / 3.7])])
    assert p.equals(q)


def test_zero_factor_annihilates_monomial():
    p = TracePolynomial(2)
    p.add_term(1.0, [np.zeros((2, 2))])
    assert not p.terms


def test_arithmetic_matches_pointwise_evaluation():
    rng = np.random.default_rng(1)
    A, B = rng.standard_normal((2, 2)), rng.standard_normal((2, 2))
    p = TracePolynomial(2, [(1.5, [A]), (0.5, [A, B])])
    q = TracePolynomial(2, [(-2.0, [B]), (0.25, [])])
    Us = rand_mats(rng, 6, 2)
    assert_allclose(poly_eval(p + q, Us), poly_eval(p, Us) + poly_eval(q, Us),
                    atol=1e-12)
    assert_allclose(poly_eval(p * q, Us), poly_eval(p, Us) * poly_eval(q, Us),
                    atol=1e-12)
    assert_allclose(poly_eval(p - p, Us), 0.0, atol=1e-13)
    assert_allclose(poly_eval(p.scaled(3.0), Us), 3.0 * poly_eval(p, Us),
                    atol=1e-12)


def test_structural_equality_ignores_factor_order():
    rng = np.random.default_rng(2)
    A, B = rng.standard_normal((2, 2)), rng.standard_normal((2, 2))
    p = TracePolynomial(2, [(1.0, [A, B])])
    q = TracePolynomial(2, [(1.0, [B, A])])
    assert p.equals(q)
    assert not p.equals(q.scaled(1.0 + 1e-6))


def test_prune_drops_small_terms():
    A = np.eye(2)
    p = TracePolynomial(2, [(1.0, [A]), (1e-15, [A, A])])
    assert p.max_degree == 1
    assert len(p.terms) == 1


def test_dim_mismatch_raises():
    with pytest.raises(DimMismatch):
        constant(2, 1.0) + constant(3, 1.0)
    with pytest.raises(DimMismatch):
        poly_eval(constant(2, 1.0), np.eye(3))
    with pytest.raises(DimMismatch):
        TracePolynomial(2).add_term(1.0, [np.eye(3)])


def test_character_and_constant_values():
    chi = character(2)
    assert complex(poly_eval(chi, np.eye(2))) == 2.0 + 0.0j
    assert complex(poly_eval(constant(2, 3.5), np.eye(2))) == 3.5 + 0.0j
    assert chi.max_degree == 1
    assert constant(2).max_degree == 0


def test_batch_eval_matches_scalar_eval():
    rng = np.random.default_rng(3)
    p = TracePolynomial(3, [(1.0 + 0.5j, [rng.standard_normal((3, 3))]),
                            (0.5, [rng.standard_normal((3, 3)),
                                   rng.standard_normal((3, 3))])])
    Us = rand_mats(rng, 5, 3)
    batch = poly_eval(p, Us)
    singles = np.array([poly_eval(p, U) for U in Us])
    assert_allclose(batch, singles, atol=1e-13)


def test_liouvillian_is_the_flow_derivative():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((3, 3))
    p = TracePolynomial(3, [(1.0, [rng.standard_normal((3, 3)),
                                   rng.standard_normal((3, 3))]),
                            (0.7, [rng.standard_normal((3, 3))])])
    Lp = liouvillian_apply(p, A)
    U = rng.standard_normal((3, 3))
    h = 1e-6
    num = (poly_eval(p, expm(h * A) @ U)
           - poly_eval(p, expm(-h * A) @ U)) / (2.0 * h)
    assert_allclose(complex(poly_eval(Lp, U)), num, rtol=1e-7, atol=1e-7)


def test_liouvillian_kills_constants():
    assert not liouvillian_apply(constant(2, 2.0), np.eye(2)).terms


def test_basisrep_rejects_duplicates_and_mixed_dims():
    one = constant(2, 1.0)
    with pytest.raises(ValueError):
        BasisRep([one, constant(2, 1.0)])
    with pytest.raises(DimMismatch):
        BasisRep([one, constant(3, 1.0)])
    with pytest.raises(ValueError):
        BasisRep([])


def test_basisrep_rank_validation_on_dependent_family():
    one = constant(2, 1.0)
    g = character(2).scaled(0.5)
    dep = one + g.scaled(2.0)
    pts = GroupSampler("SU2", 11).matrices(0, 40)
    with pytest.raises(RankDeficient):
        BasisRep([one, g, dep], sample_points=pts)
    b = BasisRep([one, g, dep], sample_points=pts, validate=False)
    assert b.conditionEstimate > 1e8


def test_matrix_rep_exact_on_the_precession_family():
    _, L, P = su2_observable_matrices(2.0)
    assert_allclose(L, [[0.0, -4.0], [1.0, 0.0]], atol=1e-13)
    assert_allclose(P, [[1.0, 0.0], [0.0, 0.0]], atol=1e-13)


def test_matrix_rep_exact_reports_escaping_element():
    basis, A = su2_observable_basis(1.0)
    sub = BasisRep([basis.elements[0]])
    with pytest.raises(BasisNotClosed) as err:
        matrix_rep_exact(lambda p: liouvillian_apply(p, A), sub)
    assert err.value.element_index == 0


def test_collocation_matches_exact_representation():
    basis, A = su2_observable_basis(1.0)
    sampler = GroupSampler("SU2", 5)

    def apply_L(f, Us):
        return poly_eval(liouvillian_apply(f, A), Us)

    op = matrix_rep_collocation(apply_L, basis, sampler, 64, 1e-8)
    exact = matrix_rep_exact(lambda p: liouvillian_apply(p, A), basis)
    assert_allclose(op.matrix, exact.matrix, atol=1e-9)
    assert op.max_residual <= 1e-8
    with pytest.raises(ValueError):
        matrix_rep_collocation(apply_L, basis, sampler, 7, 1e-8)


def test_collocation_rejects_images_outside_the_span():
    basis, A = su2_observable_basis(1.0)
    sampler = GroupSampler("SU2", 6)
    quad = character(2) * character(2)

    def apply_bad(f, Us):
        return poly_eval(quad, Us)

    with pytest.raises(BasisNotClosed):
        matrix_rep_collocation(apply_bad, basis, sampler, 64, 1e-8)
