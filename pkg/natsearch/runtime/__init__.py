"""Asynchronous multi-agent simulation"""

from natsearch.runtime.agent import AgentState
from natsearch.runtime.bus import Delivery, MessageBus, broadcast
from natsearch.runtime.recovery import RecoveryMonitor
from natsearch.runtime.simulation import Scenario, Simulation, build_scenario, run_simulation, truth_from_trace
from natsearch.runtime.trace import SimTrace

__all__ = [
    "AgentState",
    "Delivery",
    "MessageBus",
    "RecoveryMonitor",
    "Scenario",
    "SimTrace",
    "Simulation",
    "broadcast",
    "build_scenario",
    "run_simulation",
    "truth_from_trace",
]
