"""Grid-world domain types and ground-truth generation"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from natsearch.errors import ConfigError, GridBoundsError


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridEnvironment:
    """Rectangular search area of rows x cols cells, flattened row-major."""

    rows: int
    cols: int
    cell_size: float = 1.0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ConfigError(f"Grid must be at least 1x1, got {self.rows}x{self.cols}")
        if self.cell_size <= 0:
            raise ConfigError(f"cell_size must be positive, got {self.cell_size}")

    @property
    def size(self) -> int:
        """Total number of cells M."""
        return self.rows * self.cols

    def contains(self, row: int, col: int) -> bool:
        return 0 <= row < self.rows and 0 <= col < self.cols

    def flatten(self, row: int, col: int) -> int:
        """Map (row, col) to its row-major cell index.

        Raises:
            GridBoundsError: If the coordinates are off the grid
        """
        if not self.contains(row, col):
            raise GridBoundsError(
                f"Cell ({row}, {col}) outside {self.rows}x{self.cols} grid"
            )
        return row * self.cols + col

    def unflatten(self, cell: int) -> Tuple[int, int]:
        """Inverse of flatten."""
        if not 0 <= cell < self.size:
            raise GridBoundsError(f"Cell index {cell} outside [0, {self.size})")
        return divmod(int(cell), self.cols)

    def distance(self, cell_a: int, cell_b: int) -> float:
        """Euclidean distance between two cells, in cell units."""
        ra, ca = self.unflatten(cell_a)
        rb, cb = self.unflatten(cell_b)
        return float(np.hypot(ra - rb, ca - cb))


def flatten_index(row: int, col: int, env: GridEnvironment) -> int:
    return env.flatten(row, col)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Hidden binary occupancy vector beta with k ones."""

    beta: np.ndarray
    k: int

    def __post_init__(self):
        if int(np.count_nonzero(self.beta)) != self.k:
            raise ConfigError("Ground truth support does not match k")

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.beta)


def generate_ground_truth(env: GridEnvironment, k: int, rng: np.random.Generator) -> GroundTruth:
    """Place k objects uniformly at random, without replacement.

    Args:
        env: Grid environment
        k: Number of objects of interest
        rng: Random generator (the truth stream of a trial)

    Returns:
        GroundTruth with exactly k ones

    Raises:
        ConfigError: If k is negative or exceeds the number of cells
    """
    if k < 0 or k > env.size:
        raise ConfigError(f"k must be in [0, {env.size}], got {k}")

    beta = np.zeros(env.size, dtype=float)
    if k:
        beta[rng.choice(env.size, size=k, replace=False)] = 1.0
    return GroundTruth(beta=beta, k=k)
