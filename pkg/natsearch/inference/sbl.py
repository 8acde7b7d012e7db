"""Gaussian posterior, posterior sampling and EM prior updates for SBL.

Every sensing row is one-hot, so the stacked information matrix
X^T Sigma^-1 X is diagonal: entry m is the summed noise precision of all
rows that looked at cell m. The posterior is computed from these sufficient
statistics, which is exact and keeps a refit O(M + rows).
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.linalg

from natsearch.errors import NumericalError
from natsearch.models.config_models import SBLConfig
from natsearch.models.grid import GridEnvironment
from natsearch.sensing.detector import Measurement
from natsearch.utils.retry import retry_with_jitter


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MeasurementStats:
    """Per-cell summed precision and precision-weighted confidence."""

    precision: np.ndarray
    weighted: np.ndarray
    rows: int


def stack_measurements(
    measurements: Iterable[Measurement],
    size: int,
    noise_floor: float = 1e-6,
) -> MeasurementStats:
    """Accumulate X^T Sigma^-1 X (diagonal) and X^T Sigma^-1 y.

    Args:
        measurements: Measurements to stack, in any order
        size: Number of grid cells M
        noise_floor: Lower bound applied to every row variance

    Returns:
        MeasurementStats over all rows
    """
    cells, variances, values = [], [], []
    for m in measurements:
        if m.action.Q:
            cells.append(np.asarray(m.action.cells, dtype=int))
            variances.append(np.asarray(m.action.variances, dtype=float))
            values.append(np.asarray(m.y, dtype=float))

    if not cells:
        return MeasurementStats(np.zeros(size), np.zeros(size), 0)

    cells = np.concatenate(cells)
    precision = 1.0 / np.maximum(np.concatenate(variances), noise_floor)
    values = np.concatenate(values)
    return MeasurementStats(
        precision=np.bincount(cells, weights=precision, minlength=size),
        weighted=np.bincount(cells, weights=precision * values, minlength=size),
        rows=len(cells),
    )


@dataclass(frozen=True, eq=False)
class SBLPosterior:
    """Gaussian belief N(mu, V) under per-cell prior variances gamma."""

    mu: np.ndarray
    V: np.ndarray
    gamma: np.ndarray

    @property
    def variance(self) -> np.ndarray:
        return np.diagonal(self.V)

    @property
    def is_diagonal(self) -> bool:
        return not np.any(self.V - np.diag(self.variance))

    @classmethod
    def prior(cls, gamma: np.ndarray) -> "SBLPosterior":
        gamma = np.asarray(gamma, dtype=float)
        return cls(mu=np.zeros_like(gamma), V=np.diag(gamma), gamma=gamma)


def compute_posterior(
    measurements: Sequence[Measurement],
    gamma: np.ndarray,
    config: Optional[SBLConfig] = None,
) -> SBLPosterior:
    """Posterior N(mu, V) with V = (Gamma^-1 + X^T Sigma^-1 X)^-1 and mu = V X^T Sigma^-1 y.

    Args:
        measurements: Measurement set D (stacked in any order)
        gamma: Prior variances, one per cell
        config: SBL hyperparameters (variance floors)

    Returns:
        SBLPosterior carrying gamma

    Raises:
        NumericalError: If the information matrix is not finite and positive
    """
    config = config or SBLConfig()
    gamma = np.maximum(np.asarray(gamma, dtype=float), config.gamma_floor)
    stats = stack_measurements(measurements, gamma.size, config.noise_floor)

    information = 1.0 / gamma + stats.precision
    if not np.all(np.isfinite(information)) or np.any(information <= 0):
        finite = information[np.isfinite(information) & (information > 0)]
        condition = float(finite.max() / finite.min()) if finite.size else float("inf")
        raise NumericalError("Posterior information matrix is singular", condition=condition)

    variance = 1.0 / information
    return SBLPosterior(mu=variance * stats.weighted, V=np.diag(variance), gamma=gamma)


def _cholesky_lower(matrix: np.ndarray) -> np.ndarray:
    return scipy.linalg.cholesky(matrix, lower=True)


def sample_posterior(
    posterior: SBLPosterior,
    rng: np.random.Generator,
    jitter: float = 1e-9,
) -> np.ndarray:
    """Draw beta_tilde = mu + L z with L L^T = V.

    Raises:
        NumericalError: If V cannot be factored even with added jitter
    """
    z = rng.standard_normal(posterior.mu.size)
    if posterior.is_diagonal:
        return posterior.mu + np.sqrt(np.clip(posterior.variance, 0.0, None)) * z

    factor = retry_with_jitter(_cholesky_lower, max_retries=1, initial_jitter=max(jitter, 1e-12))
    try:
        L = factor(posterior.V)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Posterior covariance factorisation failed: {e}",
                             condition=float(np.linalg.cond(posterior.V))) from e
    return posterior.mu + L @ z


def em_update_gamma(posterior: SBLPosterior, config: Optional[SBLConfig] = None) -> np.ndarray:
    """M-step: gamma_m = (V_mm + mu_m^2 + 2 b) / (1 + 2 a), floored."""
    config = config or SBLConfig()
    gamma = (posterior.variance + posterior.mu ** 2 + 2.0 * config.b) / (1.0 + 2.0 * config.a)
    return np.maximum(gamma, config.gamma_floor)


def fit(
    measurements: Sequence[Measurement],
    config: Optional[SBLConfig] = None,
    size: Optional[int] = None,
    gamma0: Optional[np.ndarray] = None,
) -> SBLPosterior:
    """Alternate E-steps and M-steps from gamma0 (all ones by default).

    Args:
        measurements: Measurement set D
        config: SBL hyperparameters
        size: Number of cells M (needed when gamma0 is not given)
        gamma0: Starting prior variances

    Returns:
        Posterior after config.em_iterations EM rounds
    """
    config = config or SBLConfig()
    if gamma0 is None:
        if size is None:
            raise ValueError("fit needs either size or gamma0")
        gamma0 = np.ones(size)

    posterior = compute_posterior(measurements, gamma0, config)
    for _ in range(config.em_iterations):
        posterior = compute_posterior(measurements, em_update_gamma(posterior, config), config)
    return posterior


def estimate_beta(posterior, threshold: float = 0.5) -> np.ndarray:
    """Binary support estimate: 1 where the posterior mean exceeds threshold."""
    mu = posterior.mu if isinstance(posterior, SBLPosterior) else np.asarray(posterior)
    return (mu > threshold).astype(int)


def write_belief_csv(posterior: SBLPosterior, env: GridEnvironment, path: Path) -> None:
    """Export (mu, diag V, gamma) per cell."""
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(["cell", "row", "col", "mu", "var", "gamma"])
        for cell, (mu, var, gamma) in enumerate(zip(posterior.mu, posterior.variance, posterior.gamma)):
            row, col = env.unflatten(cell)
            writer.writerow([cell, row, col, f"{mu:.10g}", f"{var:.10g}", f"{gamma:.10g}"])
