#!/usr/bin/env python3
"""natsearch - command-line entry point

Subcommands:
    run        one seeded trial, writes trace.ndjson, metrics.json and belief.csv
    sweep      many trials over a swept parameter, writes recovery_curve.csv and time_to_recovery.csv
    calibrate  fit a distance-to-variance table from detector confidences
    viewshed   visible fraction of every coarse node seen from one node
"""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn

from natsearch.config import get_data_dir, load_config
from natsearch.errors import ConfigError, NatSearchError
from natsearch.experiments.calibration import ESTIMATORS, calibrate_noise, load_calibration_csv
from natsearch.experiments.metrics import metrics
from natsearch.experiments.presets import load_presets
from natsearch.experiments.sweep import SWEEP_PARAMETERS, SweepSpec, recovery_curve, run_sweep, time_to_recovery
from natsearch.inference.sbl import fit, write_belief_csv
from natsearch.models.config_models import POLICY_NAMES, ExperimentConfig
from natsearch.models.grid import GridEnvironment
from natsearch.monitoring.metrics import setup_metrics
from natsearch.runtime.simulation import run_simulation, truth_from_trace
from natsearch.terrain.dem import coarsen, load_dem
from natsearch.terrain.visibility import viewshed_mask, write_viewshed_csv
from natsearch.utils.logging_config import setup_logging


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def parse_delay(text: str) -> Dict[str, Any]:
    """`5` -> constant, `uniform:LOW:HIGH`, `exponential:MEAN`."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return {"kind": "constant", "value": float(parts[0])}
        if parts[0] == "uniform" and len(parts) == 3:
            return {"kind": "uniform", "low": float(parts[1]), "high": float(parts[2])}
        if parts[0] in ("exponential", "exp") and len(parts) == 2:
            return {"kind": "exponential", "mean": float(parts[1])}
    except ValueError:
        pass
    raise ConfigError(f"Cannot parse delay '{text}' (use N, uniform:LOW:HIGH or exponential:MEAN)")


def parse_value(text: str) -> Any:
    """Sweep value from the command line: bool, int, float or string."""
    lowered = text.strip().lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text.strip()


def cli_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Flags that were given, as a nested config dictionary."""
    overrides: Dict[str, Any] = {}
    for flag, key in (("seed", "seed"), ("trials", "trials"), ("policy", "policy"), ("agents", "agents"),
                      ("k", "k"), ("budget", "budget"), ("radius", "radius"), ("alpha", "alpha"),
                      ("threshold", "threshold")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value

    comms: Dict[str, Any] = {}
    if getattr(args, "drop", None) is not None:
        comms["drop_probability"] = args.drop
    if getattr(args, "delay", None) is not None:
        comms["delay"] = parse_delay(args.delay)
    if comms:
        overrides["comms"] = comms

    if getattr(args, "dem", None) is not None:
        overrides["terrain"] = {"dem_file": str(args.dem)}
        if getattr(args, "spacing", None) is not None:
            overrides["terrain"]["spacing"] = args.spacing
    if getattr(args, "no_noise_aware", False):
        overrides["noise_aware"] = False
    if getattr(args, "snapshots", False):
        overrides["trace"] = {"snapshots": True}

    logging_section = {}
    if getattr(args, "log_level", None):
        logging_section["level"] = args.log_level
    if getattr(args, "log_format", None):
        logging_section["format"] = args.log_format
    if getattr(args, "no_progress", False):
        logging_section["show_progress"] = False
    if logging_section:
        overrides["logging"] = logging_section
    return overrides


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Preset < config file < environment < flags."""
    base: Dict[str, Any] = {}
    if getattr(args, "preset", None):
        preset = load_presets().get_preset(args.preset)
        if preset is None:
            raise ConfigError(f"Unknown preset '{args.preset}'. Available: {', '.join(load_presets().names())}")
        base = preset.apply()
    return load_config(args.config, overrides=cli_overrides(args), base=base)


def configure_runtime(config: ExperimentConfig, log_file: Optional[Path] = None) -> None:
    setup_logging(config.logging.level, config.logging.format, log_file)
    setup_metrics(config.monitoring.metrics_enabled, config.monitoring.metrics_port)


def output_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out) if args.out else get_data_dir()
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    configure_runtime(config, args.log_file)
    out = output_dir(args)

    trace = run_simulation(config, trial=args.trial)
    truth = truth_from_trace(trace)
    record = metrics(trace, truth, config.threshold, config.sbl)

    trace.save(out / "trace.ndjson")
    record.save(out / "metrics.json")
    posterior = fit(trace.measurements(), config.sbl, size=truth.beta.size)
    rows, cols = trace.header["env"]["rows"], trace.header["env"]["cols"]
    write_belief_csv(posterior, GridEnvironment(rows, cols, trace.header["env"]["cell_size"]), out / "belief.csv")

    if record.recovered_at is None:
        logger.info("Not recovered within %d measurements", record.total_measurements)
    else:
        logger.info("Recovered at T=%d (T/J=%.2f), mean travel %.1f",
                    record.recovered_at, record.t_over_j, record.mean_travel)
    return EXIT_OK


def _progress() -> Progress:
    return Progress(
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
        transient=True,
    )


def cmd_sweep(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    configure_runtime(config, args.log_file)
    out = output_dir(args)

    parameter, values, level = args.param, None, args.level
    if args.preset and parameter is None:
        preset_sweep = load_presets().get_preset(args.preset).sweep or {}
        parameter = preset_sweep.get("parameter")
        values = preset_sweep.get("values")
        level = level if level is not None else preset_sweep.get("level")
    if args.values:
        values = [parse_value(v) for v in args.values.split(",")]
    t_grid = [int(t) for t in args.t_grid.split(",")] if args.t_grid else None

    spec = SweepSpec(
        base=config,
        parameter=parameter,
        values=list(values or []),
        trials=config.trials,
        level=level if level is not None else 0.7,
        t_grid=t_grid,
        out=out,
    )

    total = len(spec.values) * spec.trials
    if config.logging.show_progress:
        with _progress() as progress:
            task = progress.add_task(f"Sweeping {spec.column}", total=total)
            results = run_sweep(spec, args.concurrency, on_done=lambda _: progress.advance(task))
    else:
        results = run_sweep(spec, args.concurrency)

    recovery_curve(spec, results, out / "recovery_curve.csv")
    for row in time_to_recovery(spec, results, path=out / "time_to_recovery.csv"):
        logger.info("%s=%s: T=%s (bound %d) T/J=%s mean travel %.1f", spec.column, row[spec.column],
                    row["T"] if row["T"] is not None else "unreached",
                    row["T_bound"],
                    f"{row['T_over_J']:.2f}" if row["T_over_J"] is not None else "unreached",
                    row["mean_travel"])
    return EXIT_OK


def cmd_calibrate(args: argparse.Namespace) -> int:
    setup_logging(args.log_level or "INFO", args.log_format or "text", args.log_file)
    samples = load_calibration_csv(args.samples)
    try:
        edges = [float(e) for e in args.bins.split(",")]
    except ValueError as e:
        raise ConfigError(f"Cannot parse bin edges '{args.bins}' (use comma-separated distances)") from e
    model = calibrate_noise(
        samples, edges,
        estimator=args.estimator,
        label=args.label,
        false_positive=args.false_positive,
        interpolation=args.interpolation,
    )

    out = output_dir(args)
    path = out / "calibration.csv"
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(["depth", "variance"])
        for depth, variance in zip(model.depths, model.variances):
            writer.writerow([f"{depth:.6g}", f"{variance:.6g}"])
    logger.info("Calibrated noise table written to %s", path)
    sys.stdout.write(json.dumps({"noise": {
        "depths": list(model.depths),
        "variances": list(model.variances),
        "interpolation": model.interpolation,
        "metric": model.metric,
    }}) + "\n")
    return EXIT_OK


def parse_node(text: str, node_cols: int) -> int:
    if "," in text:
        row, col = (int(p) for p in text.split(","))
        return row * node_cols + col
    return int(text)


def cmd_viewshed(args: argparse.Namespace) -> int:
    setup_logging(args.log_level or "INFO", args.log_format or "text", args.log_file)
    dem = load_dem(args.dem, fill_nodata=args.fill_nodata)
    grid = coarsen(dem, args.spacing)
    try:
        node = parse_node(args.node, grid.node_cols)
    except ValueError as e:
        raise ConfigError(f"Cannot parse node '{args.node}' (use INDEX or ROW,COL)") from e
    if not 0 <= node < grid.size:
        raise ConfigError(f"Node {node} is outside the {grid.node_rows}x{grid.node_cols} coarse grid")

    fractions = viewshed_mask(dem, grid, node, observer_height=args.observer_height,
                              target_height=args.target_height)
    path = output_dir(args) / "viewshed.csv"
    write_viewshed_csv(fractions, path)
    logger.info("Viewshed of node %d: %.1f%% of nodes fully visible", node, 100.0 * (fractions >= 1.0).mean())
    return EXIT_OK


def _add_logging_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING, ERROR")
    parser.add_argument("--log-format", choices=["text", "json"])
    parser.add_argument("--log-file", type=Path, help="Also log to this rotating file")
    parser.add_argument("--out", type=Path, help="Output directory (default: $NATSEARCH_DATA_DIR or cwd)")


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="YAML experiment config")
    parser.add_argument("--preset", help="Named preset from config/presets.yaml")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--policy", help=f"One of: {', '.join(POLICY_NAMES)}")
    parser.add_argument("--agents", type=int)
    parser.add_argument("--k", type=int)
    parser.add_argument("--budget", type=int)
    parser.add_argument("--drop", type=float, help="Per-recipient drop probability")
    parser.add_argument("--delay", help="Delivery delay: N, uniform:LOW:HIGH or exponential:MEAN")
    parser.add_argument("--radius", type=int, help="Action radius in cells")
    parser.add_argument("--alpha", type=float, help="Travel weight")
    parser.add_argument("--threshold", type=float, help="Support threshold on the posterior mean")
    parser.add_argument("--dem", type=Path, help="ESRI ASCII DEM for the terrain scenario")
    parser.add_argument("--spacing", type=float, help="Coarse node spacing in meters")
    parser.add_argument("--no-noise-aware", action="store_true", help="Agents ignore depth-dependent noise")
    parser.add_argument("--snapshots", action="store_true", help="Record belief snapshots in the trace")
    parser.add_argument("--no-progress", action="store_true")
    _add_logging_flags(parser)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="natsearch",
        description="Decentralised multi-agent active search with depth-aware detector noise",
        epilog="Environment: NATSEARCH_LOG_LEVEL, NATSEARCH_LOG_FORMAT, NATSEARCH_METRICS_ENABLED, "
               "NATSEARCH_METRICS_PORT, NATSEARCH_DATA_DIR",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run one trial")
    _add_experiment_flags(run)
    run.add_argument("--trial", type=int, default=0, help="Trial index mixed into the seed")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="Run trials over a swept parameter")
    _add_experiment_flags(sweep)
    sweep.add_argument("--param", choices=sorted(SWEEP_PARAMETERS), help="Parameter to sweep")
    sweep.add_argument("--values", help="Comma-separated values of the swept parameter")
    sweep.add_argument("--level", type=float, help="Recovery level for time_to_recovery")
    sweep.add_argument("--t-grid", help="Comma-separated measurement counts for the recovery curve")
    sweep.add_argument("--concurrency", type=int, default=1, help="Worker processes")
    sweep.set_defaults(func=cmd_sweep)

    calibrate = sub.add_parser("calibrate", help="Fit a noise table from detector confidences")
    calibrate.add_argument("samples", type=Path, help="CSV with distance,confidence,label columns")
    calibrate.add_argument("--bins", required=True, help="Comma-separated distance bin edges in meters")
    calibrate.add_argument("--estimator", choices=ESTIMATORS, default="mle")
    calibrate.add_argument("--label", help="Only use samples with this label")
    calibrate.add_argument("--false-positive", action="store_true", help="Calibrate against ideal score 0")
    calibrate.add_argument("--interpolation", choices=["step", "linear"], default="step")
    _add_logging_flags(calibrate)
    calibrate.set_defaults(func=cmd_calibrate)

    viewshed = sub.add_parser("viewshed", help="Visible fraction of coarse nodes from one node")
    viewshed.add_argument("--dem", type=Path, required=True)
    viewshed.add_argument("--spacing", type=float, default=30.0)
    viewshed.add_argument("--node", required=True, help="Observer node: INDEX or ROW,COL")
    viewshed.add_argument("--observer-height", type=float, default=2.0)
    viewshed.add_argument("--target-height", type=float)
    viewshed.add_argument("--fill-nodata", type=float, help="Replace NODATA posts with this height")
    _add_logging_flags(viewshed)
    viewshed.set_defaults(func=cmd_viewshed)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        logger.error("Configuration error: %s", e)
        return EXIT_CONFIG
    except NatSearchError as e:
        logger.error("Run failed: %s", e)
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return EXIT_RUNTIME


if __name__ == "__main__":
    try:
        sys.exit(main())
    except Exception as e:
        logger.error("Startup failed: %s", e, exc_info=True)
        sys.exit(EXIT_RUNTIME)
