"""Configuration management for natsearch"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import ValidationError

from natsearch.errors import ConfigError
from natsearch.models.config_models import ExperimentConfig
from natsearch.models.grid import GridEnvironment
from natsearch.models.noise import DepthNoiseModel


logger = logging.getLogger(__name__)


def read_config_file(path: Path) -> Dict[str, Any]:
    """Read a YAML experiment config file.

    Args:
        path: Path to the YAML file

    Returns:
        Raw configuration dictionary

    Raises:
        ConfigError: If the file is missing or not a YAML mapping
    """
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    try:
        with open(path, 'r') as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"Could not parse {path}: {e}") from e

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must contain a mapping at the top level")
    logger.debug("Read config from %s", path)
    return data


def load_config_from_env() -> Dict[str, Any]:
    """Collect environment overrides for the ambient sections.

    Returns:
        Partial configuration dictionary (only variables that are set)
    """
    overrides: Dict[str, Any] = {}

    logging_section = {}
    if os.getenv("NATSEARCH_LOG_LEVEL"):
        logging_section["level"] = os.getenv("NATSEARCH_LOG_LEVEL")
    if os.getenv("NATSEARCH_LOG_FORMAT"):
        logging_section["format"] = os.getenv("NATSEARCH_LOG_FORMAT")
    if os.getenv("NATSEARCH_SHOW_PROGRESS"):
        logging_section["show_progress"] = os.getenv("NATSEARCH_SHOW_PROGRESS", "true").lower() == "true"
    if logging_section:
        overrides["logging"] = logging_section

    monitoring_section = {}
    if os.getenv("NATSEARCH_METRICS_ENABLED"):
        monitoring_section["metrics_enabled"] = os.getenv("NATSEARCH_METRICS_ENABLED", "false").lower() == "true"
    if os.getenv("NATSEARCH_METRICS_PORT"):
        monitoring_section["metrics_port"] = int(os.getenv("NATSEARCH_METRICS_PORT", "9090"))
    if monitoring_section:
        overrides["monitoring"] = monitoring_section

    return overrides


def merge_overrides(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge overrides into a copy of base."""
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_overrides(merged[key], value)
        else:
            merged[key] = value
    return merged


def validate_config(config: Dict[str, Any]) -> ExperimentConfig:
    """Validate configuration using Pydantic models.

    Args:
        config: Configuration dictionary

    Returns:
        Validated ExperimentConfig

    Raises:
        ConfigError: If validation fails
    """
    try:
        validated = ExperimentConfig(**config)
    except ValidationError as e:
        raise ConfigError(f"Configuration validation failed: {e}") from e
    except TypeError as e:
        raise ConfigError(f"Configuration validation failed: {e}") from e

    logger.debug("Configuration validation passed")
    return validated


def load_config(
    path: Optional[Path] = None,
    overrides: Optional[Dict[str, Any]] = None,
    base: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """Build a validated config from defaults, a file, the environment and CLI overrides.

    Args:
        path: Optional YAML config file
        overrides: Highest-precedence overrides (CLI flags)
        base: Optional starting dictionary (e.g. a preset)

    Returns:
        Validated ExperimentConfig
    """
    data: Dict[str, Any] = dict(base or {})
    if path is not None:
        data = merge_overrides(data, read_config_file(Path(path)))
    data = merge_overrides(data, load_config_from_env())
    if overrides:
        data = merge_overrides(data, overrides)
    return validate_config(data)


def build_environment(config: ExperimentConfig) -> GridEnvironment:
    """Grid environment for a config without terrain."""
    return GridEnvironment(config.grid.rows, config.grid.cols, config.grid.cell_size)


def build_noise_model(config: ExperimentConfig) -> DepthNoiseModel:
    """World noise model described by the config."""
    return DepthNoiseModel.from_table(
        config.noise.depths,
        config.noise.variances,
        interpolation=config.noise.interpolation,
        metric=config.noise.metric,
    )


def get_data_dir() -> Path:
    """Get data directory path.

    Returns:
        Path to data directory
    """
    data_dir = Path(os.getenv("NATSEARCH_DATA_DIR", Path.cwd()))
    data_dir.mkdir(parents=True, exist_ok=True)
    return data_dir
