"""Harness-side recovery check against the hidden ground truth"""

import logging
from typing import List, Optional

import numpy as np

from natsearch.inference.sbl import SBLPosterior, estimate_beta, fit
from natsearch.models.config_models import SBLConfig
from natsearch.models.grid import GroundTruth
from natsearch.sensing.detector import Measurement


logger = logging.getLogger(__name__)


class RecoveryMonitor:
    """Refits on all completed measurements and compares the support estimate to the truth.

    Agents never see this object; it only decides when a run has recovered.
    """

    def __init__(self, truth: GroundTruth, threshold: float = 0.5, sbl: Optional[SBLConfig] = None):
        self.truth = truth
        self.threshold = threshold
        self.sbl = sbl or SBLConfig()
        self.measurements: List[Measurement] = []
        self.posterior: Optional[SBLPosterior] = None
        self._gamma: Optional[np.ndarray] = None

    @property
    def count(self) -> int:
        return len(self.measurements)

    def add(self, measurement: Measurement) -> None:
        self.measurements.append(measurement)

    def check(self) -> bool:
        """True when the thresholded posterior mean equals the truth exactly."""
        gamma0 = self._gamma if self.sbl.warm_start else None
        self.posterior = fit(self.measurements, self.sbl, size=self.truth.beta.size, gamma0=gamma0)
        self._gamma = self.posterior.gamma
        estimate = estimate_beta(self.posterior, self.threshold)
        return bool(np.array_equal(estimate, self.truth.beta.astype(int)))
