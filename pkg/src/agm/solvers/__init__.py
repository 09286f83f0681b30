"""Incremental least-squares solvers with pluggable row sampling, plus the
one-dimensional toy problems."""

from .estimators import KaczmarzRegressor, LMSRegressor
from .iterative import (
    DIVERGENCE_THRESHOLD,
    ROW_KINDS,
    LeastSquaresInstance,
    MomentMatrices,
    RiskTerms,
    SolverRun,
    default_gamma,
    igm_risk,
    kaczmarz_product_form,
    make_instance,
    make_rows,
    moment_matrices,
    run_igm,
    run_kaczmarz,
)
from .problems import (
    ScalarResult,
    scalar_mean_errors,
    scalar_mean_problem,
    scalar_weighted_problem,
    weighted_error_without_replacement,
    weighted_errors,
    weighted_expected_error_with_replacement,
)
from .sampling import SCHEMES, WO, WR, SamplerConfig, sample_indices

__all__ = [
    "DIVERGENCE_THRESHOLD", "ROW_KINDS", "SCHEMES", "WO", "WR",
    "KaczmarzRegressor", "LMSRegressor",
    "LeastSquaresInstance", "MomentMatrices", "RiskTerms", "SamplerConfig", "ScalarResult",
    "SolverRun",
    "default_gamma", "igm_risk", "kaczmarz_product_form", "make_instance", "make_rows",
    "moment_matrices", "run_igm", "run_kaczmarz", "sample_indices",
    "scalar_mean_errors", "scalar_mean_problem", "scalar_weighted_problem",
    "weighted_error_without_replacement", "weighted_errors",
    "weighted_expected_error_with_replacement",
]
