"""Experiment harness: metrics, sweeps, calibration and presets"""

from natsearch.experiments.calibration import CalibrationSample, calibrate_noise, load_calibration_csv
from natsearch.experiments.metrics import MetricsRecord, coverage_bound, metrics
from natsearch.experiments.presets import Preset, PresetManager, load_presets
from natsearch.experiments.sweep import (
    SweepSpec,
    TrialResult,
    recovery_curve,
    recovery_rates,
    run_sweep,
    run_trial,
    time_to_recovery,
)

__all__ = [
    "CalibrationSample",
    "MetricsRecord",
    "Preset",
    "PresetManager",
    "SweepSpec",
    "TrialResult",
    "calibrate_noise",
    "coverage_bound",
    "load_calibration_csv",
    "load_presets",
    "metrics",
    "recovery_curve",
    "recovery_rates",
    "run_sweep",
    "run_trial",
    "time_to_recovery",
]
