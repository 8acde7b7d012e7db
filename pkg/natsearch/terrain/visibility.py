"""Line-of-sight and viewshed computation over a DEM"""

import csv
import logging
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import ndimage

from natsearch.errors import ConfigError
from natsearch.terrain.dem import CoarseGrid, Dem


logger = logging.getLogger(__name__)

# Samples evaluated per vectorised chunk of rays
_CHUNK_SAMPLES = 2_000_000
_HEIGHT_TOLERANCE = 1e-9


def _heights_at(dem: Dem, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Bilinear terrain heights at fractional pixel positions."""
    return ndimage.map_coordinates(dem.heights, [rows, cols], order=1, mode="nearest")


def sight_lines(
    dem: Dem,
    origin: Tuple[float, float],
    targets: np.ndarray,
    observer_height: float,
    target_height: Optional[float] = None,
) -> np.ndarray:
    """Visibility of many targets from one origin.

    Terrain is sampled once per pixel of ray length (endpoints excluded); a
    target is visible when no sample rises above the straight sight line from
    the observer's eye to the target point.

    Args:
        dem: Elevation map
        origin: Observer position as (row, col) in pixels
        targets: Array of shape (N, 2) of (row, col) pixel positions
        observer_height: Eye height above ground in meters
        target_height: Target point height above ground, defaults to the observer height

    Returns:
        Boolean array of shape (N,)
    """
    if target_height is None:
        target_height = observer_height
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if targets.size == 0:
        return np.zeros(0, dtype=bool)

    o = np.asarray(origin, dtype=float)
    eye = _heights_at(dem, np.array([o[0]]), np.array([o[1]]))[0] + observer_height
    goal = _heights_at(dem, targets[:, 0], targets[:, 1]) + target_height

    delta = targets - o
    steps = np.ceil(np.hypot(delta[:, 0], delta[:, 1])).astype(int)
    visible = np.ones(len(targets), dtype=bool)

    max_steps = int(steps.max()) if steps.size else 0
    if max_steps <= 1:
        return visible

    chunk = max(1, _CHUNK_SAMPLES // max_steps)
    index = np.arange(1, max_steps)
    for start in range(0, len(targets), chunk):
        sl = slice(start, start + chunk)
        n = np.maximum(steps[sl], 1)[:, None]
        t = index[None, :] / n
        valid = index[None, :] < n
        t = np.where(valid, t, 0.0)
        rows = o[0] + t * delta[sl, 0:1]
        cols = o[1] + t * delta[sl, 1:2]
        terrain = _heights_at(dem, rows.ravel(), cols.ravel()).reshape(rows.shape)
        line = eye + t * (goal[sl, None] - eye)
        blocked = valid & (terrain > line + _HEIGHT_TOLERANCE)
        visible[sl] = ~blocked.any(axis=1)
    return visible


def line_of_sight(
    dem: Dem,
    from_point: Tuple[float, float],
    to_point: Tuple[float, float],
    observer_height: float,
    target_height: Optional[float] = None,
) -> bool:
    """Whether to_point is visible from from_point (both (row, col) pixels)."""
    for point in (from_point, to_point):
        if not dem.contains(*point):
            raise ConfigError(f"Point {point} lies outside the DEM")
    return bool(sight_lines(dem, from_point, np.array([to_point]), observer_height, target_height)[0])


def _node_fraction(dem: Dem, grid: CoarseGrid, visible: np.ndarray, node: int) -> float:
    rows, cols = grid.node_window(node, dem.shape)
    window = visible[rows, cols]
    return float(window.mean()) if window.size else 0.0


def viewshed_mask(
    dem: Dem,
    grid: CoarseGrid,
    from_node: int,
    observer_height: float = 2.0,
    target_height: Optional[float] = None,
) -> np.ndarray:
    """Fraction of each coarse node's DEM posts visible from a node.

    Returns:
        Array of shape (node_rows, node_cols) with values in [0, 1]
    """
    if not 0 <= from_node < grid.size:
        raise ConfigError(f"Node {from_node} outside the {grid.node_rows}x{grid.node_cols} grid")

    nrows, ncols = dem.shape
    rr, cc = np.meshgrid(np.arange(nrows), np.arange(ncols), indexing="ij")
    targets = np.column_stack([rr.ravel(), cc.ravel()])
    visible = sight_lines(dem, grid.node_pixel(from_node), targets, observer_height, target_height)
    visible = visible.reshape(nrows, ncols)

    fractions = np.array([_node_fraction(dem, grid, visible, node) for node in range(grid.size)])
    logger.debug("Viewshed from node %d: mean visible fraction %.3f", from_node, fractions.mean())
    return fractions.reshape(grid.node_rows, grid.node_cols)


def write_viewshed_csv(fractions: np.ndarray, path: Path) -> None:
    """Write a node visibility map as node_row,node_col,fraction rows."""
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(["node_row", "node_col", "fraction"])
        for (r, c), value in np.ndenumerate(fractions):
            writer.writerow([r, c, f"{value:.6f}"])


class NodeVisibility:
    """Occlusion oracle for FOV pruning on a coarse grid.

    A target node counts as visible when at least `threshold` of its DEM
    posts are in sight. Fractions are computed per node pair on demand and
    cached.
    """

    def __init__(
        self,
        dem: Dem,
        grid: CoarseGrid,
        observer_height: float = 2.0,
        target_height: Optional[float] = None,
        threshold: float = 0.5,
    ):
        self.dem = dem
        self.grid = grid
        self.observer_height = observer_height
        self.target_height = target_height
        self.threshold = threshold
        self._fractions: Dict[Tuple[int, int], float] = {}

    def fraction(self, from_node: int, to_node: int) -> float:
        key = (from_node, to_node)
        if key not in self._fractions:
            rows, cols = self.grid.node_window(to_node, self.dem.shape)
            rr, cc = np.meshgrid(np.arange(rows.start, rows.stop), np.arange(cols.start, cols.stop), indexing="ij")
            targets = np.column_stack([rr.ravel(), cc.ravel()])
            visible = sight_lines(self.dem, self.grid.node_pixel(from_node), targets,
                                  self.observer_height, self.target_height)
            self._fractions[key] = float(visible.mean()) if visible.size else 0.0
        return self._fractions[key]

    def visible(self, from_cell: int, to_cell: int) -> bool:
        return self.fraction(from_cell, to_cell) >= self.threshold
