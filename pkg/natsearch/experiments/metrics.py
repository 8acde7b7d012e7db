"""Per-trial outcome metrics computed from a trace"""

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from scipy import stats

from natsearch.errors import ConfigError
from natsearch.models.config_models import SBLConfig
from natsearch.models.grid import GroundTruth
from natsearch.runtime.recovery import RecoveryMonitor
from natsearch.runtime.trace import SimTrace


logger = logging.getLogger(__name__)


@dataclass
class MetricsRecord:
    """Outcome of one trial.

    recovery_curve[T] says whether the estimate from the first T completed
    measurements equals the truth, for T = 0 .. total_measurements.
    """

    trial: int
    n_agents: int
    total_measurements: int
    recovered_at: Optional[int]
    recovery_curve: List[bool]
    travel: Dict[int, float] = field(default_factory=dict)

    @property
    def t_over_j(self) -> Optional[float]:
        if self.recovered_at is None:
            return None
        return self.recovered_at / self.n_agents

    @property
    def mean_travel(self) -> float:
        return float(np.mean(list(self.travel.values()))) if self.travel else 0.0

    def recovered_by(self, budget: int) -> bool:
        return self.recovered_at is not None and self.recovered_at <= budget

    def to_dict(self) -> dict:
        data = asdict(self)
        data["travel"] = {str(j): d for j, d in self.travel.items()}
        data["t_over_j"] = self.t_over_j
        data["mean_travel"] = self.mean_travel
        return data

    def save(self, path: Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w') as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
        logger.info("Metrics saved to %s", path)


def path_length(path: List[int], cols: int) -> float:
    """Sum of Euclidean hops between consecutive cells, in cells."""
    if len(path) < 2:
        return 0.0
    rows, cols_ = np.divmod(np.asarray(path), cols)
    return float(np.hypot(np.diff(rows), np.diff(cols_)).sum())


def metrics(
    trace: SimTrace,
    ground_truth: GroundTruth,
    threshold: float = 0.5,
    sbl: Optional[SBLConfig] = None,
) -> MetricsRecord:
    """Replay a trace's completed measurements and score recovery.

    Args:
        trace: Complete trace of one trial
        ground_truth: Hidden truth of that trial
        threshold: Support threshold on the posterior mean
        sbl: SBL settings; taken from the trace config when omitted

    Returns:
        MetricsRecord with the recovery curve, first recovery and travel
    """
    config = trace.header.get("config", {})
    if sbl is None:
        sbl = SBLConfig(**config["sbl"]) if "sbl" in config else SBLConfig()

    monitor = RecoveryMonitor(ground_truth, threshold, sbl)
    curve = [monitor.check()]
    for measurement in trace.measurements():
        monitor.add(measurement)
        curve.append(monitor.check())

    recovered_at = next((t for t, ok in enumerate(curve) if ok), None)

    env = trace.header.get("env", {})
    cols = int(env.get("cols", 1))
    cell_size = float(env.get("cell_size", 1.0))
    travel = {int(j): path_length(p, cols) * cell_size for j, p in trace.paths().items()}

    n_agents = int(config.get("agents", max(len(travel), 1)))
    return MetricsRecord(
        trial=int(trace.header.get("trial", 0)),
        n_agents=n_agents,
        total_measurements=len(curve) - 1,
        recovered_at=recovered_at,
        recovery_curve=curve,
        travel=travel,
    )


def coverage_bound(cells: int, look_size: int, k: int, level: float) -> int:
    """Fewest measurements before any policy can reach recovery rate `level`.

    A run cannot recover until every object has sat inside some look. T
    looks of `look_size` cells cover at most T * look_size distinct cells,
    and the chance that k uniformly placed objects all fall inside N covered
    cells is the hypergeometric probability of drawing all k.

    Args:
        cells: Number of grid cells M
        look_size: Most cells a single look can see
        k: Number of objects of interest
        level: Target recovery rate in (0, 1]

    Returns:
        Smallest T whose coverage chance reaches level

    Raises:
        ConfigError: If the arguments do not describe a search
    """
    if cells < 1 or look_size < 1 or not 0 <= k <= cells:
        raise ConfigError(f"No coverage bound for {k} objects on {cells} cells with {look_size}-cell looks")
    if not 0.0 < level <= 1.0:
        raise ConfigError(f"Recovery level must lie in (0, 1], got {level}")
    if k == 0:
        return 0

    looks = -(-cells // look_size)
    covered = np.minimum(np.arange(looks + 1) * look_size, cells)
    chance = stats.hypergeom(cells, k, covered).pmf(k)
    return int(np.flatnonzero(chance >= level - 1e-9)[0])
