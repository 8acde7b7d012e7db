"""Fit a depth noise table from labelled detector confidences"""

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import isotonic_regression

from natsearch.errors import CalibrationError
from natsearch.models.noise import DepthNoiseModel


logger = logging.getLogger(__name__)

ESTIMATORS = ("mle", "moment")


@dataclass(frozen=True)
class CalibrationSample:
    """One detector output: distance in meters, confidence in [0, 1], class label."""
    distance: float
    confidence: float
    label: str = ""

    def __post_init__(self):
        if not math.isfinite(self.distance) or self.distance < 0:
            raise CalibrationError(f"Distance must be finite and non-negative, got {self.distance}")
        if not math.isfinite(self.confidence) or not 0.0 <= self.confidence <= 1.0:
            raise CalibrationError(f"Confidence must lie in [0, 1], got {self.confidence}")


def load_calibration_csv(path: Path) -> List[CalibrationSample]:
    """Read a `distance,confidence,label` CSV.

    Raises:
        CalibrationError: On a missing file, missing columns or a bad row
    """
    path = Path(path)
    if not path.exists():
        raise CalibrationError(f"Calibration file not found: {path}")

    samples = []
    with open(path, 'r', newline='') as f:
        reader = csv.DictReader(f)
        missing = {"distance", "confidence"} - set(reader.fieldnames or [])
        if missing:
            raise CalibrationError(f"{path}: missing columns {', '.join(sorted(missing))}")
        for lineno, row in enumerate(reader, start=2):
            try:
                samples.append(CalibrationSample(
                    distance=float(row["distance"]),
                    confidence=float(row["confidence"]),
                    label=(row.get("label") or "").strip(),
                ))
            except (TypeError, ValueError) as e:
                raise CalibrationError(f"{path}:{lineno}: {e}") from e

    logger.info("Loaded %d calibration samples from %s", len(samples), path)
    return samples


def _bin_variance(deviation: np.ndarray, estimator: str) -> float:
    if estimator == "moment":
        return float(np.var(deviation, ddof=1) * math.pi / (math.pi - 2.0))
    return float(np.mean(deviation ** 2))


def calibrate_noise(
    samples: Sequence[CalibrationSample],
    bin_edges: Sequence[float],
    estimator: str = "mle",
    label: Optional[str] = None,
    false_positive: bool = False,
    interpolation: str = "step",
) -> DepthNoiseModel:
    """Estimate a monotone distance-to-variance table.

    Each bin [edge_i, edge_i+1) (the last one closed) gets a variance from the
    deviations of its confidences from the ideal score (1, or 0 in
    false-positive mode). `mle` is the mean squared deviation, which is the
    half-normal maximum-likelihood estimate; `moment` scales the deviation's
    sample variance by pi / (pi - 2). An isotonic fit weighted by bin counts
    makes the table non-decreasing. The table is keyed by the upper bin edges.

    Args:
        samples: Detector outputs
        bin_edges: Strictly increasing distance edges (at least two)
        estimator: "mle" or "moment"
        label: Keep only samples with this label
        false_positive: Calibrate empty-cell scores against ideal 0
        interpolation: Lookup mode of the returned model

    Returns:
        DepthNoiseModel in meters

    Raises:
        CalibrationError: On bad edges, an unknown estimator, or bins with fewer than two samples
    """
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise CalibrationError("Bin edges must be at least two strictly increasing distances")
    if estimator not in ESTIMATORS:
        raise CalibrationError(f"Unknown estimator '{estimator}', expected one of {', '.join(ESTIMATORS)}")

    if label is not None:
        samples = [s for s in samples if s.label == label]
    distance = np.array([s.distance for s in samples], dtype=float)
    confidence = np.array([s.confidence for s in samples], dtype=float)

    n_bins = edges.size - 1
    index = np.searchsorted(edges, distance, side="right") - 1
    index[distance == edges[-1]] = n_bins - 1
    inside = (index >= 0) & (index < n_bins)
    counts = np.bincount(index[inside], minlength=n_bins)

    sparse = [i for i in range(n_bins) if counts[i] < 2]
    if sparse:
        listing = ", ".join(f"[{edges[i]:g}, {edges[i + 1]:g})" for i in sparse)
        raise CalibrationError(f"Bins with fewer than 2 samples: {listing}", bins=sparse)

    ideal = 0.0 if false_positive else 1.0
    deviation = ideal - confidence
    raw = np.array([_bin_variance(deviation[inside & (index == i)], estimator) for i in range(n_bins)])
    fitted = isotonic_regression(raw, weights=counts.astype(float), increasing=True).x
    fitted = np.maximum.accumulate(np.maximum(fitted, 0.0))

    logger.info("Calibrated %d bins (%s): %s", n_bins, estimator,
                ", ".join(f"{e:g}m={v:.4g}" for e, v in zip(edges[1:], fitted)))
    return DepthNoiseModel.from_table(edges[1:], fitted, interpolation=interpolation, metric="meters")
