"""Candidate action sets around an agent"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from natsearch.models.grid import GridEnvironment
from natsearch.models.noise import DepthNoiseModel
from natsearch.sensing.fov import Heading, SensingAction, Visibility, make_action


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ActionSet:
    """Candidate actions plus padded arrays for vectorised scoring.

    Row i of `cells` / `precision` / `mask` describes actions[i]; padding
    entries have mask False and precision 0.
    """

    actions: Tuple[SensingAction, ...]
    positions: np.ndarray
    cells: np.ndarray
    precision: np.ndarray
    mask: np.ndarray
    radius: Optional[int] = None

    def __len__(self) -> int:
        return len(self.actions)

    @classmethod
    def from_actions(
        cls,
        actions: Sequence[SensingAction],
        noise_floor: float = 1e-6,
        radius: Optional[int] = None,
    ) -> "ActionSet":
        actions = tuple(actions)
        width = max((a.Q for a in actions), default=0)
        width = max(width, 1)
        cells = np.zeros((len(actions), width), dtype=int)
        precision = np.zeros((len(actions), width))
        mask = np.zeros((len(actions), width), dtype=bool)
        for i, action in enumerate(actions):
            if action.Q:
                cells[i, :action.Q] = action.cells
                precision[i, :action.Q] = 1.0 / np.maximum(np.asarray(action.variances), noise_floor)
                mask[i, :action.Q] = True
        positions = np.array([a.agent_cell for a in actions], dtype=int)
        return cls(actions, positions, cells, precision, mask, radius)


def travel_cost(env: GridEnvironment, from_cell: int, to_cell: int) -> float:
    """Euclidean waypoint distance in cell units."""
    return env.distance(from_cell, to_cell)


def _cells_within(env: GridEnvironment, agent_pos: int, radius: Optional[int]) -> List[int]:
    if radius is None:
        return list(range(env.size))
    row, col = env.unflatten(agent_pos)
    return [
        r * env.cols + c
        for r in range(max(0, row - radius), min(env.rows, row + radius + 1))
        for c in range(max(0, col - radius), min(env.cols, col + radius + 1))
    ]


def enumerate_action_set(
    agent_pos: int,
    radius: Optional[int],
    env: GridEnvironment,
    noise: DepthNoiseModel,
    viewshed: Optional[Visibility] = None,
    noise_floor: float = 1e-6,
) -> ActionSet:
    """All (cell, heading) poses within Chebyshev distance `radius` of the agent.

    Enumeration is position-major in cell order, headings N, S, E, W. An
    unbounded radius (None) yields every cell of the grid.
    """
    env.unflatten(agent_pos)
    actions = [
        make_action(cell, heading, env, noise, viewshed)
        for cell in _cells_within(env, agent_pos, radius)
        for heading in Heading
    ]
    return ActionSet.from_actions(actions, noise_floor=noise_floor, radius=radius)


class ActionCatalog:
    """Caches every pose of a grid so action sets are cheap slices."""

    def __init__(
        self,
        env: GridEnvironment,
        noise: DepthNoiseModel,
        viewshed: Optional[Visibility] = None,
        noise_floor: float = 1e-6,
    ):
        self.env = env
        self.noise = noise
        self.viewshed = viewshed
        self.noise_floor = noise_floor
        self._actions: Dict[Tuple[int, Heading], SensingAction] = {}
        self._sets: Dict[Tuple[Optional[int], Optional[int]], ActionSet] = {}

    def action(self, cell: int, heading: Heading) -> SensingAction:
        key = (cell, heading)
        if key not in self._actions:
            self._actions[key] = make_action(cell, heading, self.env, self.noise, self.viewshed)
        return self._actions[key]

    def around(self, agent_pos: int, radius: Optional[int]) -> ActionSet:
        """Action set for an agent at agent_pos."""
        self.env.unflatten(agent_pos)
        key = (None, None) if radius is None else (agent_pos, radius)
        if key not in self._sets:
            actions = [
                self.action(cell, heading)
                for cell in _cells_within(self.env, agent_pos, radius)
                for heading in Heading
            ]
            self._sets[key] = ActionSet.from_actions(actions, self.noise_floor, radius)
            logger.debug("Built action set of %d candidates (radius %s)", len(actions), radius)
        return self._sets[key]
