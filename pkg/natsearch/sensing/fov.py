"""Pyramid field-of-view footprints and sensing matrices"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Protocol, Tuple

import numpy as np

from natsearch.models.grid import GridEnvironment
from natsearch.models.noise import DepthNoiseModel


logger = logging.getLogger(__name__)

# Visible cells per depth row, nearest first
FOV_WIDTHS = (2, 4, 6)


class Heading(Enum):
    """Look direction; declaration order is the enumeration order."""
    N = (-1, 0)
    S = (1, 0)
    E = (0, 1)
    W = (0, -1)

    @property
    def forward(self) -> Tuple[int, int]:
        return self.value

    @property
    def lateral(self) -> Tuple[int, int]:
        dr, dc = self.value
        return (abs(dc), abs(dr))


class Visibility(Protocol):
    """Anything that can say whether a cell is visible from another."""

    def visible(self, from_cell: int, to_cell: int) -> bool:
        ...


def enumerate_fov_cells(
    agent_cell: int,
    heading: Heading,
    env: GridEnvironment,
    viewshed: Optional[Visibility] = None,
    metric: str = "rows",
) -> List[Tuple[int, float]]:
    """List the (cell, depth) pairs an agent sees.

    Depth row d (1, 2, 3) spans FOV_WIDTHS[d-1] cells at lateral offsets
    -w/2 .. w/2-1 across the heading axis. Cells off the map are clipped and
    cells the viewshed marks occluded are removed.

    Args:
        agent_cell: Cell the agent stands on
        heading: Look direction
        env: Grid environment
        viewshed: Optional occlusion oracle
        metric: ``rows`` for depth-row keys, ``meters`` for projection distance

    Returns:
        Ordered (cell, depth) list, nearest row first, left to right
    """
    row, col = env.unflatten(agent_cell)
    dr, dc = heading.forward
    lr, lc = heading.lateral
    scale = env.cell_size if metric == "meters" else 1.0

    cells = []
    for depth_row, width in enumerate(FOV_WIDTHS, start=1):
        for offset in range(-width // 2, width // 2):
            r = row + dr * depth_row + lr * offset
            c = col + dc * depth_row + lc * offset
            if not env.contains(r, c):
                continue
            cell = r * env.cols + c
            if viewshed is not None and not viewshed.visible(agent_cell, cell):
                continue
            cells.append((cell, depth_row * scale))
    return cells


@dataclass(frozen=True)
class SensingAction:
    """An agent pose with its visible cells, depths and assumed variances."""

    agent_cell: int
    heading: Heading
    cells: Tuple[int, ...] = ()
    depths: Tuple[float, ...] = ()
    variances: Tuple[float, ...] = ()

    @property
    def Q(self) -> int:
        return len(self.cells)

    @property
    def fov_cells(self) -> List[Tuple[int, float, float]]:
        return list(zip(self.cells, self.depths, self.variances))

    def to_record(self) -> dict:
        return {
            "agent_cell": self.agent_cell,
            "heading": self.heading.name,
            "cells": list(self.cells),
            "depths": list(self.depths),
            "variances": list(self.variances),
        }

    @classmethod
    def from_record(cls, record: dict) -> "SensingAction":
        return cls(
            agent_cell=int(record["agent_cell"]),
            heading=Heading[record["heading"]],
            cells=tuple(int(c) for c in record["cells"]),
            depths=tuple(float(d) for d in record["depths"]),
            variances=tuple(float(v) for v in record["variances"]),
        )


def make_action(
    agent_cell: int,
    heading: Heading,
    env: GridEnvironment,
    noise: DepthNoiseModel,
    viewshed: Optional[Visibility] = None,
) -> SensingAction:
    """Build a sensing action whose variances come from the given noise model."""
    fov = enumerate_fov_cells(agent_cell, heading, env, viewshed, metric=noise.metric)
    if not fov:
        return SensingAction(agent_cell, heading)
    cells, depths = zip(*fov)
    variances = noise.variance(np.asarray(depths))
    return SensingAction(
        agent_cell=agent_cell,
        heading=heading,
        cells=tuple(int(c) for c in cells),
        depths=tuple(float(d) for d in depths),
        variances=tuple(float(v) for v in variances),
    )


def build_sensing(action: SensingAction, size: int) -> Tuple[np.ndarray, np.ndarray]:
    """One-hot sensing rows and the diagonal of the noise covariance.

    Args:
        action: Sensing action
        size: Number of grid cells M

    Returns:
        (X, sigma2) with X of shape (Q, M) and sigma2 of shape (Q,)
    """
    X = np.zeros((action.Q, size))
    if action.Q:
        X[np.arange(action.Q), np.asarray(action.cells)] = 1.0
    return X, np.asarray(action.variances, dtype=float)
