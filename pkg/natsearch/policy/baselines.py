"""Comparison policies: information gain, binary TS, random and point sweep"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np
from scipy.special import expit, logit

from natsearch.inference.sbl import SBLPosterior
from natsearch.models.grid import GridEnvironment
from natsearch.models.noise import DepthNoiseModel
from natsearch.policy.actions import ActionSet
from natsearch.policy.nats import diagonal_rewards
from natsearch.sensing.detector import Measurement
from natsearch.sensing.fov import Heading, SensingAction


logger = logging.getLogger(__name__)


def information_gain(posterior: SBLPosterior, candidate: SensingAction, noise_floor: float = 1e-6) -> float:
    """Mutual information between beta and the candidate's observation.

    I = 1/2 [log det(X_t V X_t^T + Sigma_t) - log det(Sigma_t)]
    """
    if candidate.Q == 0:
        return 0.0
    idx = np.asarray(candidate.cells, dtype=int)
    sigma2 = np.maximum(np.asarray(candidate.variances, dtype=float), noise_floor)
    S = posterior.V[np.ix_(idx, idx)] + np.diag(sigma2)
    _, logdet = np.linalg.slogdet(S)
    return 0.5 * float(logdet - np.log(sigma2).sum())


def information_gains(posterior: SBLPosterior, action_set: ActionSet, noise_floor: float = 1e-6) -> np.ndarray:
    if not posterior.is_diagonal:
        return np.array([information_gain(posterior, a, noise_floor) for a in action_set.actions])
    v = posterior.variance[action_set.cells]
    gain = 0.5 * np.log1p(v * action_set.precision)
    return np.where(action_set.mask, gain, 0.0).sum(axis=1)


def ig_select(
    posterior: SBLPosterior,
    action_set: ActionSet,
    noise_floor: float = 1e-6,
) -> Tuple[SensingAction, float]:
    """Greedy information-gain choice, deterministic given the belief."""
    if len(action_set) == 0:
        raise ValueError("Action set is empty")
    gains = information_gains(posterior, action_set, noise_floor)
    best = int(np.argmax(gains))
    return action_set.actions[best], float(gains[best])


def bints_beliefs(
    measurements: Iterable[Measurement],
    size: int,
    prior_rate: float,
    noise_floor: float = 1e-6,
) -> np.ndarray:
    """Independent per-cell occupancy probabilities under binary observations.

    Each reading y of cell m with variance s2 adds the Gaussian log-likelihood
    ratio (2y - 1) / (2 s2) of beta_m = 1 against beta_m = 0 to the prior
    log-odds logit(prior_rate).
    """
    if prior_rate <= 0.0:
        return np.zeros(size)
    if prior_rate >= 1.0:
        return np.ones(size)

    log_odds = np.full(size, logit(prior_rate))
    for m in measurements:
        if not m.action.Q:
            continue
        cells = np.asarray(m.action.cells, dtype=int)
        s2 = np.maximum(np.asarray(m.action.variances, dtype=float), noise_floor)
        np.add.at(log_odds, cells, (2.0 * np.asarray(m.y) - 1.0) / (2.0 * s2))
    return expit(log_odds)


def bints_select(
    beliefs: np.ndarray,
    action_set: ActionSet,
    rng: np.random.Generator,
) -> Tuple[SensingAction, float]:
    """Sample a binary world and score candidates with the one-step MSE reward."""
    if len(action_set) == 0:
        raise ValueError("Action set is empty")
    world = (rng.random(beliefs.size) < beliefs).astype(float)
    rewards = diagonal_rewards(world, beliefs, beliefs * (1.0 - beliefs), action_set)
    best = int(np.argmax(rewards))
    return action_set.actions[best], float(rewards[best])


def rnd_select(action_set: ActionSet, rng: np.random.Generator) -> Tuple[SensingAction, float]:
    """Uniform choice over the action set."""
    if len(action_set) == 0:
        raise ValueError("Action set is empty")
    return action_set.actions[int(rng.integers(len(action_set)))], 0.0


@dataclass
class PointSweep:
    """Per-agent cursor into the interleaved cell sweep."""
    agent_id: int
    n_agents: int
    count: int = 0


def point_next(
    sweep: PointSweep,
    env: GridEnvironment,
    noise: DepthNoiseModel,
    depth: Optional[float] = None,
) -> SensingAction:
    """Next single-cell action: cell (agent_id + J * count) mod M at the nearest depth.

    Agents start offset by their id and stride by J, so together they cover
    the grid row-major without repeats until the sweep wraps.
    """
    cell = (sweep.agent_id + sweep.n_agents * sweep.count) % env.size
    sweep.count += 1
    if depth is None:
        depth = env.cell_size if noise.metric == "meters" else 1.0
    variance = float(noise.variance(depth))
    return SensingAction(
        agent_cell=cell,
        heading=Heading.N,
        cells=(cell,),
        depths=(float(depth),),
        variances=(variance,),
    )
