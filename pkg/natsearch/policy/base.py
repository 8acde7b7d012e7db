"""Policy interface and registry used by agents"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple, Type

import numpy as np

from natsearch.inference.sbl import SBLPosterior
from natsearch.models.grid import GridEnvironment
from natsearch.models.noise import DepthNoiseModel
from natsearch.policy.actions import ActionCatalog
from natsearch.policy.baselines import (
    PointSweep,
    bints_beliefs,
    bints_select,
    ig_select,
    point_next,
    rnd_select,
)
from natsearch.policy.nats import nats_select
from natsearch.sensing.detector import Measurement
from natsearch.sensing.fov import SensingAction


logger = logging.getLogger(__name__)


@dataclass
class DecisionContext:
    """What an agent knows when it picks its next action."""
    agent_id: int
    n_agents: int
    position: int
    measurements: Sequence[Measurement]
    posterior: Optional[SBLPosterior]
    catalog: ActionCatalog
    rng: np.random.Generator


class Policy(ABC):
    """Chooses the next sensing action for one agent"""

    name: str = ""
    needs_posterior: bool = False

    def __init__(
        self,
        env: GridEnvironment,
        noise: DepthNoiseModel,
        k: int = 1,
        radius: Optional[int] = None,
        alpha: float = 0.0,
        jitter: float = 1e-9,
        noise_floor: float = 1e-6,
    ):
        self.env = env
        self.noise = noise
        self.k = k
        self.radius = radius
        self.alpha = alpha
        self.jitter = jitter
        self.noise_floor = noise_floor

    @abstractmethod
    def select(self, context: DecisionContext) -> Tuple[SensingAction, float]:
        """Return (action, score)."""


class NatsPolicy(Policy):
    name = "nats"
    needs_posterior = True

    def select(self, context: DecisionContext) -> Tuple[SensingAction, float]:
        action_set = context.catalog.around(context.position, self.radius)
        return nats_select(
            context.posterior, action_set, context.position, self.alpha, context.rng,
            self.env, jitter=self.jitter, noise_floor=self.noise_floor,
        )


class InformationGainPolicy(Policy):
    name = "ig"
    needs_posterior = True

    def select(self, context: DecisionContext) -> Tuple[SensingAction, float]:
        action_set = context.catalog.around(context.position, self.radius)
        return ig_select(context.posterior, action_set, self.noise_floor)


class BinaryTSPolicy(Policy):
    name = "bints"

    def select(self, context: DecisionContext) -> Tuple[SensingAction, float]:
        beliefs = bints_beliefs(context.measurements, self.env.size, self.k / self.env.size, self.noise_floor)
        action_set = context.catalog.around(context.position, self.radius)
        return bints_select(beliefs, action_set, context.rng)


class RandomPolicy(Policy):
    name = "rnd"

    def select(self, context: DecisionContext) -> Tuple[SensingAction, float]:
        return rnd_select(context.catalog.around(context.position, self.radius), context.rng)


class PointPolicy(Policy):
    name = "point"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._sweeps: Dict[int, PointSweep] = {}

    def select(self, context: DecisionContext) -> Tuple[SensingAction, float]:
        sweep = self._sweeps.setdefault(context.agent_id, PointSweep(context.agent_id, context.n_agents))
        return point_next(sweep, self.env, self.noise), 0.0


POLICIES: Dict[str, Type[Policy]] = {
    cls.name: cls
    for cls in (NatsPolicy, InformationGainPolicy, BinaryTSPolicy, RandomPolicy, PointPolicy)
}


def make_policy(name: str, env: GridEnvironment, noise: DepthNoiseModel, **kwargs) -> Policy:
    """Instantiate a registered policy by name.

    Raises:
        ValueError: If the name is not registered
    """
    try:
        cls = POLICIES[name.lower()]
    except KeyError:
        raise ValueError(f"Unknown policy '{name}'. Available: {', '.join(POLICIES)}") from None
    return cls(env, noise, **kwargs)
