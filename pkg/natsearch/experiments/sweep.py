"""Trial sweeps, recovery-rate curves and time-to-recovery tables"""

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from natsearch.config import merge_overrides, validate_config
from natsearch.errors import ConfigError, NatSearchError
from natsearch.experiments.metrics import coverage_bound, metrics
from natsearch.models.config_models import ExperimentConfig
from natsearch.runtime.simulation import Scenario, build_scenario, run_simulation, truth_from_trace
from natsearch.sensing.fov import FOV_WIDTHS
from natsearch.utils.batch import process_in_batches


logger = logging.getLogger(__name__)

UNREACHED = "unreached"

# Swept parameter -> path into the config dictionary
SWEEP_PARAMETERS: Dict[str, Tuple[str, ...]] = {
    "agents": ("agents",),
    "k": ("k",),
    "policy": ("policy",),
    "noise_aware": ("noise_aware",),
    "drop_probability": ("comms", "drop_probability"),
}

# Config sections that determine the grid, noise models and occlusion
_SCENARIO_KEYS = ("grid", "noise", "noise_aware", "terrain", "sbl")
_SCENARIOS: Dict[str, Scenario] = {}


def _nested(path: Tuple[str, ...], value: Any) -> Dict[str, Any]:
    data: Dict[str, Any] = {path[-1]: value}
    for key in reversed(path[:-1]):
        data = {key: data}
    return data


@dataclass
class SweepSpec:
    """A base config, one swept parameter and how to summarise it.

    With no parameter the sweep is a single series of `trials` runs of the
    base config.
    """

    base: ExperimentConfig
    parameter: Optional[str] = None
    values: List[Any] = field(default_factory=list)
    trials: Optional[int] = None
    level: float = 0.7
    t_grid: Optional[List[int]] = None
    out: Optional[Path] = None

    def __post_init__(self):
        if self.trials is None:
            self.trials = self.base.trials
        if self.trials < 1:
            raise ConfigError("A sweep needs at least one trial")
        if not 0.0 < self.level <= 1.0:
            raise ConfigError(f"Recovery level must lie in (0, 1], got {self.level}")
        if self.parameter is None:
            self.values = [None]
            return
        if self.parameter not in SWEEP_PARAMETERS:
            raise ConfigError(f"Cannot sweep '{self.parameter}'. Available: {', '.join(SWEEP_PARAMETERS)}")
        if not self.values:
            raise ConfigError(f"Sweep over '{self.parameter}' needs at least one value")
        if len(set(map(str, self.values))) != len(self.values):
            raise ConfigError(f"Swept values must be distinct: {self.values}")

    @property
    def column(self) -> str:
        return self.parameter or "series"

    def configs(self) -> List[Tuple[Any, ExperimentConfig]]:
        """One validated config per swept value, in value order."""
        base = self.base.model_dump(mode="json")
        base["trials"] = self.trials
        if self.parameter is None:
            return [(None, validate_config(base))]
        path = SWEEP_PARAMETERS[self.parameter]
        return [(v, validate_config(merge_overrides(base, _nested(path, v)))) for v in self.values]

    def grid_for(self, config: ExperimentConfig) -> List[int]:
        if self.t_grid is not None:
            return sorted(set(int(t) for t in self.t_grid))
        return list(range(config.budget + 1))


@dataclass(frozen=True)
class TrialResult:
    """Summary of one trial of one swept value."""
    value: Any
    trial: int
    n_agents: int
    budget: int
    recovered_at: Optional[int]
    total_measurements: int
    mean_travel: float


def _scenario_for(config: ExperimentConfig) -> Scenario:
    data = config.model_dump(mode="json")
    key = json.dumps({k: data[k] for k in _SCENARIO_KEYS}, sort_keys=True)
    if key not in _SCENARIOS:
        _SCENARIOS[key] = build_scenario(config)
    return _SCENARIOS[key]


def run_trial(job: Tuple[Any, Dict[str, Any], int]) -> TrialResult:
    """Simulate and score one trial. Module-level so worker processes can run it."""
    value, config_data, trial = job
    config = ExperimentConfig(**config_data)
    trace = run_simulation(config, trial, _scenario_for(config))
    record = metrics(trace, truth_from_trace(trace), config.threshold, config.sbl)
    return TrialResult(
        value=value,
        trial=trial,
        n_agents=config.agents,
        budget=config.budget,
        recovered_at=record.recovered_at,
        total_measurements=record.total_measurements,
        mean_travel=record.mean_travel,
    )


def sweep_jobs(spec: SweepSpec) -> List[Tuple[Any, Dict[str, Any], int]]:
    return [
        (value, config.model_dump(mode="json"), trial)
        for value, config in spec.configs()
        for trial in range(spec.trials)
    ]


def run_sweep(
    spec: SweepSpec,
    concurrency: int = 1,
    on_done: Optional[Callable[[Any], None]] = None,
) -> List[TrialResult]:
    """Run every (value, trial) pair; results sorted by value order then trial.

    Raises:
        NatSearchError: If any trial fails
    """
    jobs = sweep_jobs(spec)
    logger.info("Running %d trials (%s over %d values)", len(jobs), spec.column, len(spec.values))
    outcomes = process_in_batches(jobs, run_trial, concurrency=concurrency, on_done=on_done)

    failures = [detail for ok, detail in outcomes if not ok]
    if failures:
        raise NatSearchError(f"{len(failures)} trial(s) failed, first error: {failures[0]}")

    order = {str(v): i for i, v in enumerate(spec.values)}
    results = [r for _, r in outcomes]
    return sorted(results, key=lambda r: (order[str(r.value)], r.trial))


def _by_value(spec: SweepSpec, results: Sequence[TrialResult]) -> List[Tuple[Any, List[TrialResult]]]:
    return [(v, [r for r in results if str(r.value) == str(v)]) for v in spec.values]


def recovery_rates(results: Sequence[TrialResult], t_grid: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """Fraction of trials recovered by each T, and its binomial standard error."""
    firsts = np.array([np.inf if r.recovered_at is None else r.recovered_at for r in results])
    t = np.asarray(t_grid, dtype=float)
    rates = (firsts[None, :] <= t[:, None]).mean(axis=1) if firsts.size else np.zeros(t.size)
    se = np.sqrt(rates * (1.0 - rates) / max(len(results), 1))
    return rates, se


def _write_csv(path: Path, header: List[str], rows: List[List[Any]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
    logger.info("Wrote %s (%d rows)", path, len(rows))


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def recovery_curve(spec: SweepSpec, results: Sequence[TrialResult], path: Optional[Path] = None) -> List[Dict[str, Any]]:
    """Recovery rate and standard error per T for every swept value.

    Columns: [<parameter>,] T, recovery_rate, standard_error
    """
    configs = dict((str(v), c) for v, c in spec.configs())
    rows = []
    for value, group in _by_value(spec, results):
        grid = spec.grid_for(configs[str(value)])
        rates, se = recovery_rates(group, grid)
        for t, p, s in zip(grid, rates, se):
            rows.append({spec.column: value, "T": int(t), "recovery_rate": float(p), "standard_error": float(s)})

    if path is not None:
        header = ([spec.column] if spec.parameter else []) + ["T", "recovery_rate", "standard_error"]
        _write_csv(path, header, [
            ([row[spec.column]] if spec.parameter else [])
            + [row["T"], _fmt(row["recovery_rate"]), _fmt(row["standard_error"])]
            for row in rows
        ])
    return rows


def time_to_recovery(
    spec: SweepSpec,
    results: Sequence[TrialResult],
    level: Optional[float] = None,
    path: Optional[Path] = None,
) -> List[Dict[str, Any]]:
    """Smallest T (and T/J) at which the recovery rate reaches `level`, per swept value.

    Columns: <parameter>, T, T_over_J, mean_travel, T_bound; unreached levels
    are written as "unreached". T_bound is the coverage_bound of the swept
    config, the fewest measurements any policy could need.
    """
    level = spec.level if level is None else level
    if not 0.0 < level <= 1.0:
        raise ConfigError(f"Recovery level must lie in (0, 1], got {level}")

    configs = dict((str(v), c) for v, c in spec.configs())
    rows = []
    for value, group in _by_value(spec, results):
        config = configs[str(value)]
        grid = list(range(config.budget + 1))
        rates, _ = recovery_rates(group, grid)
        hits = np.flatnonzero(rates >= level - 1e-12)
        t_hit = int(grid[hits[0]]) if hits.size else None
        travel = float(np.mean([r.mean_travel for r in group])) if group else math.nan
        bound = coverage_bound(_scenario_for(config).env.size, sum(FOV_WIDTHS), config.k, level)
        rows.append({
            spec.column: value,
            "T": t_hit,
            "T_over_J": None if t_hit is None else t_hit / config.agents,
            "mean_travel": travel,
            "T_bound": bound,
        })

    if path is not None:
        _write_csv(path, [spec.column, "T", "T_over_J", "mean_travel", "T_bound"], [
            [row[spec.column],
             UNREACHED if row["T"] is None else row["T"],
             UNREACHED if row["T_over_J"] is None else _fmt(row["T_over_J"]),
             _fmt(row["mean_travel"]),
             row["T_bound"]]
            for row in rows
        ])
    return rows
