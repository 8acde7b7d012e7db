"""Discrete-event simulation of asynchronous decentralised search"""

import heapq
import itertools
import logging
import time as wallclock
from dataclasses import dataclass
from typing import Any, List, Optional, Tuple

import numpy as np

from natsearch.config import build_environment, build_noise_model
from natsearch.errors import ConfigError
from natsearch.models.config_models import ExperimentConfig
from natsearch.models.grid import GridEnvironment, GroundTruth, generate_ground_truth
from natsearch.models.noise import DepthNoiseModel
from natsearch.monitoring import metrics as prom
from natsearch.policy.actions import ActionCatalog
from natsearch.policy.base import DecisionContext, make_policy
from natsearch.runtime.agent import AgentState
from natsearch.runtime.bus import Delivery, MessageBus
from natsearch.runtime.recovery import RecoveryMonitor
from natsearch.runtime.trace import (
    ACTION_ISSUED,
    BELIEF_SNAPSHOT,
    MESSAGE_DELIVERED,
    MESSAGE_DROPPED,
    OBSERVATION_COMPLETED,
    RECOVERY_STATUS,
    SimTrace,
)
from natsearch.sensing.detector import Measurement, observe
from natsearch.sensing.fov import SensingAction, Visibility
from natsearch.terrain.dem import coarsen, load_dem
from natsearch.terrain.visibility import NodeVisibility
from natsearch.utils.logging_config import ContextAdapter


logger = logging.getLogger(__name__)

# Same-time ordering: deliveries land before completions, completions before new selections
_DELIVER, _COMPLETE, _FREE = 0, 1, 2


@dataclass
class Scenario:
    """Grid, noise models and occlusion shared by every trial of a config."""
    env: GridEnvironment
    world_noise: DepthNoiseModel
    belief_noise: DepthNoiseModel
    viewshed: Optional[Visibility]
    catalog: ActionCatalog


def build_scenario(config: ExperimentConfig) -> Scenario:
    """Resolve the search grid (plain or DEM-derived) and the noise models.

    Raises:
        ConfigError: If the terrain cannot be used or k does not fit the grid
    """
    world_noise = build_noise_model(config)
    belief_noise = world_noise if config.noise_aware else world_noise.flattened()

    viewshed = None
    if config.terrain is not None:
        dem = load_dem(config.terrain.dem_file, fill_nodata=config.terrain.fill_nodata)
        grid = coarsen(dem, config.terrain.spacing)
        env = grid.environment
        viewshed = NodeVisibility(
            dem, grid,
            observer_height=config.terrain.observer_height,
            target_height=config.terrain.target_height,
            threshold=config.terrain.visibility_threshold,
        )
        logger.info("Terrain scenario: %dx%d nodes at %.0f m", grid.node_rows, grid.node_cols, grid.spacing)
        if config.k > env.size:
            raise ConfigError(f"k={config.k} exceeds the {env.size} terrain nodes")
        if config.start_cells and any(not 0 <= c < env.size for c in config.start_cells):
            raise ConfigError("start_cells must lie on the terrain node grid")
    else:
        env = build_environment(config)

    catalog = ActionCatalog(env, belief_noise, viewshed, noise_floor=config.sbl.noise_floor)
    return Scenario(env, world_noise, belief_noise, viewshed, catalog)


def truth_from_trace(trace: SimTrace) -> GroundTruth:
    """Rebuild the hidden truth recorded in a trace header."""
    env = trace.header["env"]
    beta = np.zeros(int(env["rows"]) * int(env["cols"]))
    support = [int(c) for c in trace.header["truth"]]
    beta[support] = 1.0
    return GroundTruth(beta, len(support))


class Simulation:
    """One trial: J agents, one message bus and a recovery monitor.

    Agents act as soon as they are free, using only the measurements they
    hold at that instant. Nothing in the loop waits on message delivery.
    """

    def __init__(self, config: ExperimentConfig, trial: int = 0, scenario: Optional[Scenario] = None):
        self.config = config
        self.trial = trial
        self.scenario = scenario or build_scenario(config)
        env = self.scenario.env
        n_agents = config.agents

        seeds = np.random.SeedSequence([config.seed, trial]).spawn(3 + 2 * n_agents)
        truth_rng, bus_rng, start_rng = (np.random.default_rng(s) for s in seeds[:3])
        agent_seeds = seeds[3:3 + n_agents]
        timing_seeds = seeds[3 + n_agents:]

        self.truth = generate_ground_truth(env, config.k, truth_rng)
        if config.start_cells is not None:
            starts = [int(c) for c in config.start_cells]
        else:
            starts = [int(c) for c in start_rng.integers(env.size, size=n_agents)]

        durations = config.timing.agent_durations or [config.timing.sensing_duration] * n_agents
        self.agents: List[AgentState] = []
        for j in range(n_agents):
            policy = make_policy(
                config.policy_for(j), env, self.scenario.belief_noise,
                k=config.k, radius=config.radius, alpha=config.alpha,
                jitter=config.sbl.jitter, noise_floor=config.sbl.noise_floor,
            )
            self.agents.append(AgentState(
                agent_id=j,
                position=starts[j],
                policy=policy,
                rng=np.random.default_rng(agent_seeds[j]),
                timing_rng=np.random.default_rng(timing_seeds[j]),
                base_duration=float(durations[j]),
            ))

        self.bus = MessageBus(n_agents, config.comms, bus_rng)
        self.monitor = RecoveryMonitor(self.truth, config.threshold, config.sbl)
        self.trace = SimTrace(header={
            "trial": trial,
            "seed": config.seed,
            "config": config.model_dump(mode="json"),
            "env": {"rows": env.rows, "cols": env.cols, "cell_size": env.cell_size},
            "truth": [int(c) for c in self.truth.support],
            "start_cells": starts,
            "policies": [config.policy_for(j) for j in range(n_agents)],
        })
        self.log = ContextAdapter(logger, {"trial": trial})
        self.issued = 0
        self.recovered = False
        self._queue: List[Tuple[float, int, int, Any]] = []
        self._order = itertools.count()

    def _push(self, at: float, kind: int, payload: Any) -> None:
        heapq.heappush(self._queue, (at, kind, next(self._order), payload))

    def _log_extra(self, agent: AgentState, now: float) -> dict:
        return {"agent_id": agent.agent_id, "sim_time": now, "policy": agent.policy.name}

    def _check_recovery(self, now: float) -> bool:
        self.recovered = self.monitor.check()
        self.trace.record(RECOVERY_STATUS, now, measurements=self.monitor.count, recovered=self.recovered)
        return self.recovered

    def _start_action(self, agent: AgentState, now: float) -> None:
        if self.issued >= self.config.budget:
            return

        started = wallclock.perf_counter()
        posterior = None
        if agent.policy.needs_posterior or self.config.trace.snapshots:
            posterior = agent.refit(self.config.sbl, self.scenario.env.size)
        context = DecisionContext(
            agent_id=agent.agent_id,
            n_agents=len(self.agents),
            position=agent.position,
            measurements=agent.measurements,
            posterior=posterior,
            catalog=self.scenario.catalog,
            rng=agent.rng,
        )
        action, score = agent.policy.select(context)
        prom.record_selection(agent.policy.name, wallclock.perf_counter() - started)

        task = self.issued
        self.issued += 1
        if self.config.trace.snapshots:
            self.trace.record(BELIEF_SNAPSHOT, now, agent_id=agent.agent_id, task=task,
                              mu=[float(v) for v in posterior.mu],
                              var=[float(v) for v in posterior.variance])
        self.trace.record(
            ACTION_ISSUED, now,
            agent_id=agent.agent_id,
            task=task,
            held=len(agent.measurements),
            action=action.to_record(),
            score=float(score),
            hop=float(self.scenario.env.distance(agent.position, action.agent_cell)),
        )
        self.log.debug("Issued task %d at cell %d facing %s", task, action.agent_cell, action.heading.name,
                       extra=self._log_extra(agent, now))

        agent.move_to(action.agent_cell)
        agent.busy_until = now + agent.sensing_duration(self.config.timing.duration_jitter)
        self._push(agent.busy_until, _COMPLETE, (agent.agent_id, action, now, task))

    def _complete(self, now: float, agent_id: int, action: SensingAction, issued_at: float, task: int) -> bool:
        agent = self.agents[agent_id]
        measurement = observe(
            self.truth, action, agent.rng,
            world_noise=self.scenario.world_noise,
            agent_id=agent_id, issue_time=issued_at, completion_time=now, uid=task,
        )
        agent.add_measurement(measurement)
        self.trace.record(OBSERVATION_COMPLETED, now, agent_id=agent_id, task=task,
                          measurement=measurement.to_record())
        prom.record_measurement(agent.policy.name)

        for delivery in self.bus.broadcast(measurement, now):
            if delivery.dropped:
                self.trace.record(MESSAGE_DROPPED, now, sender=agent_id, recipient=delivery.recipient,
                                  uid=measurement.uid)
                prom.record_message("dropped")
            else:
                self._push(delivery.deliver_time, _DELIVER, (delivery, measurement))

        self.monitor.add(measurement)
        if self._check_recovery(now):
            self.log.info("Recovered after %d measurements", self.monitor.count,
                          extra=self._log_extra(agent, now))
            return True
        self._push(now, _FREE, agent_id)
        return False

    def _deliver(self, now: float, delivery: Delivery, measurement: Measurement) -> None:
        accepted = self.agents[delivery.recipient].add_measurement(measurement)
        self.trace.record(MESSAGE_DELIVERED, now, sender=delivery.sender, recipient=delivery.recipient,
                          uid=delivery.uid, accepted=accepted)
        prom.record_message("delivered")

    def run(self) -> SimTrace:
        """Run until the budget is spent and all messages settle, or until recovery."""
        if not self._check_recovery(0.0):
            for agent in self.agents:
                self._push(0.0, _FREE, agent.agent_id)

        while self._queue:
            now, kind, _, payload = heapq.heappop(self._queue)
            if kind == _DELIVER:
                self._deliver(now, *payload)
            elif kind == _COMPLETE:
                if self._complete(now, *payload):
                    break
            else:
                self._start_action(self.agents[payload], now)

        prom.record_trial_complete(self.recovered)
        self.log.debug("Trial %d finished: %d measurements, recovered=%s",
                       self.trial, self.monitor.count, self.recovered)
        return self.trace


def run_simulation(config: ExperimentConfig, trial: int = 0, scenario: Optional[Scenario] = None) -> SimTrace:
    """Run one seeded trial and return its trace.

    Args:
        config: Validated experiment config
        trial: Trial index, mixed into the seed
        scenario: Prebuilt scenario to share across trials

    Returns:
        SimTrace of the trial
    """
    return Simulation(config, trial, scenario).run()
