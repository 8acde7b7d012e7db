"""Per-agent state: position, local measurement set and belief"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Set

import numpy as np

from natsearch.inference.sbl import SBLPosterior, fit
from natsearch.models.config_models import SBLConfig
from natsearch.policy.base import Policy
from natsearch.sensing.detector import Measurement


logger = logging.getLogger(__name__)


@dataclass
class AgentState:
    """One searcher. Its measurement set only ever grows.

    Attributes:
        agent_id: Index j of the agent
        position: Current cell
        policy: Action selection policy
        rng: Agent's own random stream for policy sampling
        timing_rng: Stream for sensing duration jitter
        base_duration: Sensing time before jitter
        measurements: Own and received measurements, in arrival order
        gamma: Warm-start prior variances for the next refit
        busy_until: Time the current sensing action completes
    """

    agent_id: int
    position: int
    policy: Policy
    rng: np.random.Generator
    timing_rng: np.random.Generator
    base_duration: float = 1.0
    measurements: List[Measurement] = field(default_factory=list)
    gamma: Optional[np.ndarray] = None
    busy_until: float = 0.0
    _uids: Set[int] = field(default_factory=set, repr=False)

    def add_measurement(self, measurement: Measurement) -> bool:
        """Append unless already held; returns whether it was new."""
        if measurement.uid in self._uids:
            return False
        self._uids.add(measurement.uid)
        self.measurements.append(measurement)
        return True

    def refit(self, config: SBLConfig, size: int) -> SBLPosterior:
        """Fit the SBL posterior on everything this agent currently holds."""
        gamma0 = self.gamma if config.warm_start else None
        posterior = fit(self.measurements, config, size=size, gamma0=gamma0)
        self.gamma = posterior.gamma
        return posterior

    def move_to(self, cell: int) -> None:
        self.position = cell

    def sensing_duration(self, jitter: float) -> float:
        return self.base_duration + (self.timing_rng.uniform(0.0, jitter) if jitter > 0 else 0.0)

