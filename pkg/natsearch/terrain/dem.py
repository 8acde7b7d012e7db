"""ESRI ASCII grid ingestion and coarse node grids"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from natsearch.errors import ConfigError, DemParseError
from natsearch.models.grid import GridEnvironment


logger = logging.getLogger(__name__)

REQUIRED_KEYS = ("ncols", "nrows", "cellsize")
OPTIONAL_KEYS = ("xllcorner", "yllcorner", "xllcenter", "yllcenter", "nodata_value")


@dataclass(frozen=True, eq=False)
class Dem:
    """Height raster in meters; row 0 is the northern edge.

    Heights are posts at pixel positions, so a raster of n columns spans
    (n - 1) * resolution meters.
    """

    heights: np.ndarray
    resolution: float
    origin: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.heights.ndim != 2 or min(self.heights.shape) < 1:
            raise ConfigError("DEM must be a non-empty 2-D raster")
        if self.resolution <= 0:
            raise ConfigError(f"DEM resolution must be positive, got {self.resolution}")
        if not np.all(np.isfinite(self.heights)):
            raise ConfigError("DEM heights must be finite")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.heights.shape

    def contains(self, row: float, col: float) -> bool:
        nrows, ncols = self.shape
        return 0 <= row <= nrows - 1 and 0 <= col <= ncols - 1


def _parse_header_line(line: str, lineno: int, path: str) -> Tuple[str, float]:
    parts = line.split()
    if len(parts) != 2:
        raise DemParseError(f"Malformed header line '{line.strip()}'", line=lineno, path=path)
    key = parts[0].lower()
    try:
        value = float(parts[1])
    except ValueError:
        raise DemParseError(f"Non-numeric header value for {parts[0]}", line=lineno, path=path)
    return key, value


def load_dem(path: Path, fill_nodata: Optional[float] = None) -> Dem:
    """Read an ESRI ASCII grid.

    Args:
        path: Path to the .asc file
        fill_nodata: Height substituted for NODATA cells; when None, NODATA
            cells are rejected

    Returns:
        Dem with the header's cell size as resolution

    Raises:
        DemParseError: On malformed headers, ragged rows, non-numeric or
            NODATA cells (with the offending line number)
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"DEM file not found: {path}")

    with open(path, 'r') as f:
        lines = f.readlines()

    header = {}
    lineno = 0
    for lineno, line in enumerate(lines, start=1):
        token = line.split()[0].lower() if line.split() else ""
        if token in REQUIRED_KEYS or token in OPTIONAL_KEYS:
            key, value = _parse_header_line(line, lineno, str(path))
            header[key] = value
        else:
            lineno -= 1
            break

    missing = [k for k in REQUIRED_KEYS if k not in header]
    if missing:
        raise DemParseError(f"Missing header keys: {', '.join(missing)}", line=lineno + 1, path=str(path))

    ncols, nrows = int(header["ncols"]), int(header["nrows"])
    if ncols < 1 or nrows < 1 or ncols != header["ncols"] or nrows != header["nrows"]:
        raise DemParseError("ncols and nrows must be positive integers", path=str(path))
    nodata = header.get("nodata_value")

    rows = []
    for offset, line in enumerate(lines[lineno:], start=lineno + 1):
        if not line.strip():
            continue
        tokens = line.split()
        if len(tokens) != ncols:
            raise DemParseError(f"Expected {ncols} values, found {len(tokens)}", line=offset, path=str(path))
        try:
            values = [float(t) for t in tokens]
        except ValueError:
            raise DemParseError("Non-numeric cell value", line=offset, path=str(path))
        if nodata is not None and any(v == nodata for v in values):
            if fill_nodata is None:
                raise DemParseError("NODATA cell found and no fill value configured", line=offset, path=str(path))
            values = [fill_nodata if v == nodata else v for v in values]
        rows.append(values)

    if len(rows) != nrows:
        raise DemParseError(f"Expected {nrows} data rows, found {len(rows)}", line=len(lines), path=str(path))

    heights = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(heights)):
        raise DemParseError("Non-finite cell value", path=str(path))

    origin = None
    if "xllcorner" in header and "yllcorner" in header:
        origin = (header["xllcorner"], header["yllcorner"])
    elif "xllcenter" in header and "yllcenter" in header:
        origin = (header["xllcenter"], header["yllcenter"])

    logger.info("Loaded %dx%d DEM from %s (%.2f m/pixel, %.1f..%.1f m)",
                nrows, ncols, path, header["cellsize"], heights.min(), heights.max())
    return Dem(heights=heights, resolution=float(header["cellsize"]), origin=origin)


def write_dem(dem: Dem, path: Path, nodata: float = -9999.0) -> None:
    """Write a Dem as an ESRI ASCII grid."""
    nrows, ncols = dem.shape
    x0, y0 = dem.origin or (0.0, 0.0)
    with open(path, 'w') as f:
        f.write(f"ncols {ncols}\n")
        f.write(f"nrows {nrows}\n")
        f.write(f"xllcorner {x0}\n")
        f.write(f"yllcorner {y0}\n")
        f.write(f"cellsize {dem.resolution}\n")
        f.write(f"NODATA_value {nodata}\n")
        for row in dem.heights:
            f.write(" ".join(repr(float(v)) for v in row) + "\n")


@dataclass(frozen=True, eq=False)
class CoarseGrid:
    """Waypoint nodes placed every `ratio` DEM posts."""

    spacing: float
    ratio: int
    node_rows: int
    node_cols: int
    elevation: np.ndarray

    @property
    def size(self) -> int:
        return self.node_rows * self.node_cols

    @property
    def environment(self) -> GridEnvironment:
        """Search grid whose cells are the coarse nodes."""
        return GridEnvironment(self.node_rows, self.node_cols, self.spacing)

    def node_pixel(self, node: int) -> Tuple[int, int]:
        """DEM post (row, col) under a node."""
        r, c = divmod(int(node), self.node_cols)
        return r * self.ratio, c * self.ratio

    def node_window(self, node: int, dem_shape: Tuple[int, int]) -> Tuple[slice, slice]:
        """DEM posts within half a spacing of the node (half-open window)."""
        pr, pc = self.node_pixel(node)
        half = self.ratio / 2.0
        nrows, ncols = dem_shape
        rows = slice(max(0, math.ceil(pr - half)), min(nrows, math.ceil(pr + half)))
        cols = slice(max(0, math.ceil(pc - half)), min(ncols, math.ceil(pc + half)))
        return rows, cols


def coarsen(dem: Dem, spacing: float) -> CoarseGrid:
    """Place coarse nodes every `spacing` meters across the DEM extent.

    Args:
        dem: Source elevation map
        spacing: Node spacing in meters

    Returns:
        CoarseGrid with node elevations sampled at the node posts

    Raises:
        ConfigError: If spacing is smaller than, or not a multiple of, the resolution
    """
    ratio = spacing / dem.resolution
    if ratio < 1 or abs(ratio - round(ratio)) > 1e-9:
        raise ConfigError(
            f"Spacing {spacing} m must be a positive multiple of the DEM resolution {dem.resolution} m"
        )
    ratio = int(round(ratio))
    nrows, ncols = dem.shape
    node_rows = (nrows - 1) // ratio + 1
    node_cols = (ncols - 1) // ratio + 1
    elevation = dem.heights[::ratio, ::ratio][:node_rows, :node_cols].copy()

    logger.debug("Coarsened %dx%d DEM to %dx%d nodes at %.1f m", nrows, ncols, node_rows, node_cols, spacing)
    return CoarseGrid(spacing=float(spacing), ratio=ratio, node_rows=node_rows,
                      node_cols=node_cols, elevation=elevation)
