"""Sparse graph learning under total-positivity constraints.

Estimates a precision matrix with non-positive off-diagonal entries from
multivariate samples (ADMM with lasso / adaptive-lasso penalties), extracts
the graph Laplacian, selects regularization by BIC, and ships synthetic
benchmark generators with a Monte-Carlo harness.
"""

__version__ = "0.1.0"

from .admm import (
    AdmmState,
    InnerResult,
    SolverConfig,
    adapt_rho,
    check_convergence,
    omega_update,
    s_neg,
    soft_threshold,
    solve_inner,
    u_update,
    uniform_weights,
    v_update,
)
from .bench import BenchReport, BenchSpec, monte_carlo
from .estimator import (
    MODE_ADAPTIVE,
    MODE_LASSO,
    EstimatorSpec,
    OuterDiagnostics,
    estimate,
    lsp_objective,
    lsp_weights,
)
from .exceptions import DataError, NumericalError
from .graph import EdgeSet, GraphEstimate, build_laplacian, build_weights, extract_edges
from .linalg import pinv_sqrt_factor, sample_covariance, standardize, sym_eigendecompose
from .metrics import MetricsReport, f1_score, frob_error
from .selection import (
    LambdaGrid,
    SelectionReport,
    bic,
    find_lambda_sm,
    lambda_grid,
    select_lambda,
)
from .synthetic import (
    GroundTruthModel,
    chain_graph,
    er_graph,
    laplacian_precision,
    make_ground_truth,
    sample_gaussian,
    shift_and_factor,
    two_component_er,
)

__all__ = [
    "AdmmState",
    "BenchReport",
    "BenchSpec",
    "DataError",
    "EdgeSet",
    "EstimatorSpec",
    "GraphEstimate",
    "GroundTruthModel",
    "InnerResult",
    "LambdaGrid",
    "MetricsReport",
    "MODE_ADAPTIVE",
    "MODE_LASSO",
    "NumericalError",
    "OuterDiagnostics",
    "SelectionReport",
    "SolverConfig",
    "adapt_rho",
    "bic",
    "build_laplacian",
    "build_weights",
    "chain_graph",
    "check_convergence",
    "er_graph",
    "estimate",
    "extract_edges",
    "f1_score",
    "find_lambda_sm",
    "frob_error",
    "lambda_grid",
    "laplacian_precision",
    "lsp_objective",
    "lsp_weights",
    "make_ground_truth",
    "monte_carlo",
    "omega_update",
    "pinv_sqrt_factor",
    "s_neg",
    "sample_covariance",
    "sample_gaussian",
    "select_lambda",
    "shift_and_factor",
    "soft_threshold",
    "solve_inner",
    "standardize",
    "sym_eigendecompose",
    "two_component_er",
    "u_update",
    "uniform_weights",
    "v_update",
]
