"""Simulated object-detector confidences with depth-aware one-sided noise"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from natsearch.models.grid import GroundTruth
from natsearch.models.noise import DepthNoiseModel
from natsearch.sensing.fov import SensingAction


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Measurement:
    """One completed sensing action and the confidences it returned."""

    action: SensingAction
    y: np.ndarray
    agent_id: int
    issue_time: float
    completion_time: float
    uid: int = 0

    def __post_init__(self):
        if len(self.y) != self.action.Q:
            raise ValueError(f"Expected {self.action.Q} confidences, got {len(self.y)}")

    def to_record(self) -> dict:
        return {
            "uid": self.uid,
            "agent_id": self.agent_id,
            "issue_time": self.issue_time,
            "completion_time": self.completion_time,
            "action": self.action.to_record(),
            "y": [float(v) for v in self.y],
        }

    @classmethod
    def from_record(cls, record: dict) -> "Measurement":
        return cls(
            action=SensingAction.from_record(record["action"]),
            y=np.asarray(record["y"], dtype=float),
            agent_id=int(record["agent_id"]),
            issue_time=float(record["issue_time"]),
            completion_time=float(record["completion_time"]),
            uid=int(record["uid"]),
        )


def observe(
    ground_truth: GroundTruth,
    action: SensingAction,
    rng: np.random.Generator,
    world_noise: Optional[DepthNoiseModel] = None,
    agent_id: int = 0,
    issue_time: float = 0.0,
    completion_time: float = 0.0,
    uid: int = 0,
) -> Measurement:
    """Draw detector confidences for every visible cell of an action.

    Half-normal noise pushes each score toward the wrong label: it is added
    for empty cells and subtracted for occupied ones, then clamped to [0, 1].

    Args:
        ground_truth: Hidden occupancy vector
        action: Sensing action to execute
        rng: The observing agent's random stream
        world_noise: True detector model; defaults to the action's own variances
        agent_id: Observing agent
        issue_time: Simulation time the action was issued
        completion_time: Simulation time the observation completed
        uid: Unique measurement id

    Returns:
        Measurement carrying the action and its confidences
    """
    if world_noise is not None and action.Q:
        variances = world_noise.variance(np.asarray(action.depths))
    else:
        variances = np.asarray(action.variances, dtype=float)

    beta = ground_truth.beta[np.asarray(action.cells, dtype=int)]
    magnitude = np.abs(rng.normal(0.0, np.sqrt(variances), size=action.Q))
    y = np.where(beta > 0.5, beta - magnitude, beta + magnitude)
    y = np.clip(y, 0.0, 1.0)

    return Measurement(
        action=action,
        y=y,
        agent_id=agent_id,
        issue_time=issue_time,
        completion_time=completion_time,
        uid=uid,
    )
