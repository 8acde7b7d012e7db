"""Best-effort broadcast of measurements with random loss and delay"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from natsearch.models.config_models import CommsConfig, DelayConfig
from natsearch.sensing.detector import Measurement


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Delivery:
    """Fate of one copy of a measurement sent to one recipient."""
    sender: int
    recipient: int
    uid: int
    send_time: float
    deliver_time: Optional[float]

    @property
    def dropped(self) -> bool:
        return self.deliver_time is None


def sample_delay(delay: DelayConfig, rng: np.random.Generator) -> float:
    if delay.kind == "uniform":
        return float(rng.uniform(delay.low, delay.high))
    if delay.kind == "exponential":
        return float(rng.exponential(delay.mean))
    return float(delay.value)


class MessageBus:
    """Lossy one-hop broadcast. No acknowledgements, retries or relaying."""

    def __init__(self, n_agents: int, comms: Optional[CommsConfig] = None,
                 rng: Optional[np.random.Generator] = None):
        self.n_agents = n_agents
        self.comms = comms or CommsConfig()
        self.rng = rng if rng is not None else np.random.default_rng()
        self.sent = 0
        self.dropped = 0

    @property
    def drop_probability(self) -> float:
        return self.comms.drop_probability

    def broadcast(self, measurement: Measurement, send_time: float) -> List[Delivery]:
        return broadcast(self, measurement, send_time, self.rng)


def broadcast(
    bus: MessageBus,
    measurement: Measurement,
    send_time: float,
    rng: np.random.Generator,
) -> List[Delivery]:
    """Schedule delivery of a measurement to every other agent.

    Each recipient, in id order, is independently dropped with the bus's drop
    probability and otherwise receives the message after a sampled delay.
    """
    deliveries = []
    for recipient in range(bus.n_agents):
        if recipient == measurement.agent_id:
            continue
        bus.sent += 1
        if bus.drop_probability > 0 and rng.random() < bus.drop_probability:
            bus.dropped += 1
            deliveries.append(Delivery(measurement.agent_id, recipient, measurement.uid, send_time, None))
            continue
        deliver_time = send_time + sample_delay(bus.comms.delay, rng)
        deliveries.append(Delivery(measurement.agent_id, recipient, measurement.uid, send_time, deliver_time))
    return deliveries
