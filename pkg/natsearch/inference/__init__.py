"""Sparse Bayesian learning belief over the occupancy vector"""

from natsearch.inference.sbl import (
    MeasurementStats,
    SBLPosterior,
    compute_posterior,
    em_update_gamma,
    estimate_beta,
    fit,
    sample_posterior,
    stack_measurements,
    write_belief_csv,
)

__all__ = [
    "MeasurementStats",
    "SBLPosterior",
    "compute_posterior",
    "em_update_gamma",
    "estimate_beta",
    "fit",
    "sample_posterior",
    "stack_measurements",
    "write_belief_csv",
]
