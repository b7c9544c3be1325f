"""Marginal logistic regression testing with principal-factor FDP estimation."""
from .estimator import LogitPFA
from .exceptions import LogitPFAError
from .glm_marginal import MarginalFit, fit_logistic, fit_logistic_batch, score_contributions
from .mmm import estimate_covariance, stack_scores, to_correlation, z_statistics
from .pfa import (
    FactorModel,
    FdpReport,
    adjusted_pvalues,
    build_factor_model,
    count_rejections,
    estimate_factors_l1,
    estimate_factors_l2,
    estimate_fdp,
    find_threshold,
    select_num_factors,
    spectral_decompose,
)

__all__ = [
    "LogitPFA",
    "LogitPFAError",
    "MarginalFit",
    "fit_logistic",
    "fit_logistic_batch",
    "score_contributions",
    "stack_scores",
    "estimate_covariance",
    "to_correlation",
    "z_statistics",
    "spectral_decompose",
    "select_num_factors",
    "build_factor_model",
    "FactorModel",
    "estimate_factors_l1",
    "estimate_factors_l2",
    "count_rejections",
    "estimate_fdp",
    "FdpReport",
    "adjusted_pvalues",
    "find_threshold",
]
__version__ = "0.1.0"
