"""Noise-aware Thompson sampling: one-step expected-MSE reward and selection"""

import logging
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from natsearch.inference.sbl import SBLPosterior, sample_posterior
from natsearch.models.grid import GridEnvironment
from natsearch.policy.actions import ActionSet
from natsearch.sensing.fov import SensingAction


logger = logging.getLogger(__name__)


def nats_reward(
    beta_tilde: np.ndarray,
    posterior: SBLPosterior,
    candidate: SensingAction,
    noise_floor: float = 1e-6,
) -> float:
    """Negative expected squared error of the one-step posterior mean.

    With y_t ~ N(X_t beta_tilde, Sigma_t) the updated mean is
    mu + K (y_t - X_t mu), K = V X_t^T (X_t V X_t^T + Sigma_t)^-1, so the
    expectation splits into the squared bias ||beta_tilde - E[mu+]||^2 and
    tr(K Sigma_t K^T). The posterior already summarises the measurement set.
    """
    d = np.asarray(beta_tilde, dtype=float) - posterior.mu
    if candidate.Q == 0:
        return -float(d @ d)

    idx = np.asarray(candidate.cells, dtype=int)
    sigma2 = np.maximum(np.asarray(candidate.variances, dtype=float), noise_floor)
    VX = posterior.V[:, idx]
    S = posterior.V[np.ix_(idx, idx)] + np.diag(sigma2)
    K = scipy.linalg.solve(S, VX.T, assume_a="pos").T

    bias = d - K @ d[idx]
    spread = float(np.sum(K ** 2 * sigma2[None, :]))
    return -(float(bias @ bias) + spread)


def diagonal_rewards(
    beta_tilde: np.ndarray,
    mu: np.ndarray,
    variance: np.ndarray,
    action_set: ActionSet,
) -> np.ndarray:
    """nats_reward for every candidate when the belief covariance is diagonal.

    Only the candidate's own cells change; for each of them the updated
    variance is v / (1 + v p) and the bias shrinks by 1 / (1 + v p).
    """
    d = beta_tilde - mu
    base = float(d @ d)
    if len(action_set) == 0:
        return np.zeros(0)

    cells = action_set.cells
    p = action_set.precision
    v = variance[cells]
    dc = d[cells]
    shrink = 1.0 / (1.0 + v * p)
    v_plus = v * shrink
    change = (dc * shrink) ** 2 + v_plus ** 2 * p - dc ** 2
    change = np.where(action_set.mask, change, 0.0)
    return -(base + change.sum(axis=1))


def candidate_rewards(
    beta_tilde: np.ndarray,
    posterior: SBLPosterior,
    action_set: ActionSet,
    noise_floor: float = 1e-6,
) -> np.ndarray:
    """Rewards for a whole action set, vectorised when V is diagonal."""
    if posterior.is_diagonal:
        return diagonal_rewards(beta_tilde, posterior.mu, posterior.variance, action_set)
    return np.array([
        nats_reward(beta_tilde, posterior, action, noise_floor) for action in action_set.actions
    ])


def travel_costs(env: GridEnvironment, prev_pos: int, action_set: ActionSet) -> np.ndarray:
    row, col = env.unflatten(prev_pos)
    rows, cols = np.divmod(action_set.positions, env.cols)
    return np.hypot(rows - row, cols - col)


def nats_select(
    posterior: SBLPosterior,
    action_set: ActionSet,
    prev_pos: int,
    alpha: float,
    rng: np.random.Generator,
    env: GridEnvironment,
    jitter: float = 1e-9,
    noise_floor: float = 1e-6,
    beta_tilde: Optional[np.ndarray] = None,
) -> Tuple[SensingAction, float]:
    """Sample beta_tilde and pick argmax of reward - alpha * travel.

    Args:
        posterior: Agent's current belief
        action_set: Non-empty candidate set
        prev_pos: Agent's current cell
        alpha: Travel weight
        rng: Agent's random stream
        env: Grid environment (for travel distances)
        jitter: Factorisation jitter for the posterior draw
        noise_floor: Variance floor for candidate rows
        beta_tilde: Use this sample instead of drawing one

    Returns:
        (selected action, its penalised score); ties go to the first candidate
    """
    if len(action_set) == 0:
        raise ValueError("Action set is empty")
    if beta_tilde is None:
        beta_tilde = sample_posterior(posterior, rng, jitter)

    scores = candidate_rewards(beta_tilde, posterior, action_set, noise_floor)
    if alpha > 0:
        scores = scores - alpha * travel_costs(env, prev_pos, action_set)
    best = int(np.argmax(scores))
    return action_set.actions[best], float(scores[best])
