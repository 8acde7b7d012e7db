"""Depth-to-variance noise model for detector confidence scores"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from natsearch.errors import ConfigError


logger = logging.getLogger(__name__)

# Synthetic benchmark: {1, 4, 9} x 0.005 for the three pyramid depth rows
SYNTHETIC_DEPTHS = (1.0, 2.0, 3.0)
SYNTHETIC_VARIANCES = (0.005, 0.020, 0.045)


@dataclass(frozen=True)
class DepthNoiseModel:
    """Tabulated confidence variance as a function of depth.

    ``step`` lookup returns the variance of the first table depth that is
    greater than or equal to the query, which is the right reading for depth
    rows and calibration bins keyed by their upper edge. ``linear`` lookup
    interpolates between table depths. Both clamp beyond the table ends.
    """

    depths: Tuple[float, ...] = SYNTHETIC_DEPTHS
    variances: Tuple[float, ...] = SYNTHETIC_VARIANCES
    interpolation: str = "step"
    metric: str = "rows"
    _depth_array: np.ndarray = field(init=False, repr=False, compare=False)
    _variance_array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        depths = np.asarray(self.depths, dtype=float)
        variances = np.asarray(self.variances, dtype=float)
        if depths.ndim != 1 or depths.size == 0 or depths.shape != variances.shape:
            raise ConfigError("Noise table needs matching, non-empty depth and variance lists")
        if np.any(np.diff(depths) <= 0):
            raise ConfigError("Noise table depths must be strictly increasing")
        if np.any(variances < 0) or not np.all(np.isfinite(variances)):
            raise ConfigError("Noise variances must be finite and non-negative")
        if np.any(np.diff(variances) < 0):
            raise ConfigError("Noise variances must be non-decreasing in depth")
        if self.interpolation not in ("step", "linear"):
            raise ConfigError(f"Unknown interpolation '{self.interpolation}'")
        if self.metric not in ("rows", "meters"):
            raise ConfigError(f"Unknown depth metric '{self.metric}'")
        object.__setattr__(self, "_depth_array", depths)
        object.__setattr__(self, "_variance_array", variances)

    @classmethod
    def from_table(cls, depths: Sequence[float], variances: Sequence[float], **kwargs) -> "DepthNoiseModel":
        return cls(tuple(float(d) for d in depths), tuple(float(v) for v in variances), **kwargs)

    def variance(self, depth) -> np.ndarray:
        """Vectorised depth_variance."""
        depth = np.asarray(depth, dtype=float)
        if np.any(depth < 0):
            raise ConfigError("Depth must be non-negative")
        if self.interpolation == "linear":
            return np.interp(depth, self._depth_array, self._variance_array)
        index = np.searchsorted(self._depth_array, depth, side="left")
        index = np.minimum(index, self._depth_array.size - 1)
        return self._variance_array[index]

    def flattened(self, value: Optional[float] = None) -> "DepthNoiseModel":
        """Same table shape with every variance set to value, the table mean by default."""
        if value is None:
            value = float(self._variance_array.mean())
        return DepthNoiseModel(
            self.depths,
            tuple(float(value) for _ in self.variances),
            interpolation=self.interpolation,
            metric=self.metric,
        )


def depth_variance(model: DepthNoiseModel, depth: float) -> float:
    """Variance of the detector confidence at the given depth.

    Depths past the last table entry clamp to the farthest calibrated variance.
    """
    return float(model.variance(depth))
