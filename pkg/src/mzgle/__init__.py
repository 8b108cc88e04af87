"""Trace-polynomial algebra, group-average projections and projected dynamics.

The package splits an operator flow x' = Lx into drift, noise and memory via
an idempotent conditional expectation, solves the resulting integro-
differential equation on a uniform grid and checks the construction against
exact identities, closed-form references and Monte Carlo moments.
"""

__version__ = "0.1.0"

from .algebra import (BasisRep, MatrixC, OperatorRep, TraceMonomial,
                      TracePolynomial, character, constant, liouvillian_apply,
                      matrix_rep_collocation, matrix_rep_exact)
from .haar import (GROUP_DIM, GROUPS, GroupSampler, MomentTable,
                   UnsupportedOrder, class_project, conj_moment1,
                   conj_moment2, haar_quadrature, mc_class_project,
                   mc_conj_moment2)
from .projections import (EmptySpace, FiniteMeasureSpace, FiniteObservable,
                          InvalidDensityMatrix, NotNormalized, ProjectionOp,
                          condexp_level_sets, condexp_partial_trace,
                          condexp_tensor, negative_control, ptrace_B,
                          torus_q_norm_demo, unvec, vec,
                          verify_condexp_axioms, verify_state_preservation)
from .nmz import (HAVE_COMPILED, BasisMismatch, GLEProblem, GLESolution,
                  KernelTable, PairingSingular, StepDivergence, TimeGrid,
                  assemble_gle, duality_check, dyson_check, lag_cache,
                  scalar_kernel_lift, solve_state_nmz, solve_volterra,
                  spectrum_report)
from .quantum import (BipartiteSystem, NotHermitian, build_liouvillian_superop,
                      exact_reduce, nmz_reduce_bipartite)
from .demos import DEMOS

__all__ = [
    "__version__",
    "BasisRep", "MatrixC", "OperatorRep", "TraceMonomial", "TracePolynomial",
    "character", "constant", "liouvillian_apply", "matrix_rep_collocation",
    "matrix_rep_exact",
    "GROUP_DIM", "GROUPS", "GroupSampler", "MomentTable", "UnsupportedOrder",
    "class_project", "conj_moment1", "conj_moment2", "haar_quadrature",
    "mc_class_project", "mc_conj_moment2",
    "EmptySpace", "FiniteMeasureSpace", "FiniteObservable",
    "InvalidDensityMatrix", "NotNormalized", "ProjectionOp",
    "condexp_level_sets", "condexp_partial_trace", "condexp_tensor",
    "negative_control", "ptrace_B", "torus_q_norm_demo", "unvec", "vec",
    "verify_condexp_axioms", "verify_state_preservation",
    "HAVE_COMPILED", "BasisMismatch", "GLEProblem", "GLESolution",
    "KernelTable", "PairingSingular", "StepDivergence", "TimeGrid",
    "assemble_gle", "duality_check", "dyson_check", "lag_cache",
    "scalar_kernel_lift", "solve_state_nmz", "solve_volterra",
    "spectrum_report",
    "BipartiteSystem", "NotHermitian", "build_liouvillian_superop",
    "exact_reduce", "nmz_reduce_bipartite",
    "DEMOS",
]
