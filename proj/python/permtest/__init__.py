"""Permutation test of whether a regression model class fits more than noise."""

from ._core import (
    Dataset,
    FittedModel,
    PermtestError,
    RankTestResult,
    RegressorSpec,
    TestConfig,
    TestOutcome,
    empirical_quantile,
    fourier_features,
    generate,
    kendall_tau,
    mlp_fit,
    ols_fit,
    pesarin_statistic,
    predict,
    r_squared,
    rank_independence_test,
    run_permutation_test,
    sample_permutations,
    spearman_rho,
    va_index,
    validate_dataset,
)

__all__ = [
    "Dataset",
    "FittedModel",
    "PermtestError",
    "RankTestResult",
    "RegressorSpec",
    "TestConfig",
    "TestOutcome",
    "empirical_quantile",
    "fourier_features",
    "generate",
    "kendall_tau",
    "mlp_fit",
    "ols_fit",
    "pesarin_statistic",
    "predict",
    "r_squared",
    "rank_independence_test",
    "run_permutation_test",
    "sample_permutations",
    "spearman_rho",
    "va_index",
    "validate_dataset",
]
