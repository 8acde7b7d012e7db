"""Elevation maps, coarse waypoint grids and line-of-sight visibility"""

from natsearch.terrain.dem import CoarseGrid, Dem, coarsen, load_dem, write_dem
from natsearch.terrain.visibility import (
    NodeVisibility,
    line_of_sight,
    viewshed_mask,
    write_viewshed_csv,
)

__all__ = [
    "CoarseGrid",
    "Dem",
    "NodeVisibility",
    "coarsen",
    "line_of_sight",
    "load_dem",
    "viewshed_mask",
    "write_dem",
    "write_viewshed_csv",
]
