"""Pydantic models for experiment configuration validation"""

import logging
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from natsearch.models.noise import SYNTHETIC_DEPTHS, SYNTHETIC_VARIANCES


logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
POLICY_NAMES = ("nats", "bints", "ig", "rnd", "point")


class GridConfig(BaseModel):
    """Search grid dimensions"""
    rows: int = Field(16, ge=1, description="M1, number of grid rows")
    cols: int = Field(16, ge=1, description="M2, number of grid columns")
    cell_size: float = Field(1.0, gt=0, description="Meters per grid step")


class NoiseConfig(BaseModel):
    """Depth-aware detector noise table"""
    depths: List[float] = Field(default_factory=lambda: list(SYNTHETIC_DEPTHS))
    variances: List[float] = Field(default_factory=lambda: list(SYNTHETIC_VARIANCES))
    interpolation: Literal["step", "linear"] = "step"
    metric: Literal["rows", "meters"] = "rows"

    @model_validator(mode='after')
    def validate_table(self):
        if not self.depths or len(self.depths) != len(self.variances):
            raise ValueError('depths and variances must be non-empty and the same length')
        if any(b <= a for a, b in zip(self.depths, self.depths[1:])):
            raise ValueError('depths must be strictly increasing')
        if any(v < 0 for v in self.variances):
            raise ValueError('variances must be non-negative')
        if any(b < a for a, b in zip(self.variances, self.variances[1:])):
            raise ValueError('variances must be non-decreasing in depth')
        return self


class SBLConfig(BaseModel):
    """Sparse Bayesian learning hyperparameters"""
    a: float = Field(0.0, ge=0, description="Inverse-gamma shape")
    b: float = Field(0.0, ge=0, description="Inverse-gamma scale")
    em_iterations: int = Field(1, ge=0, description="EM rounds per refit")
    jitter: float = Field(1e-9, ge=0, description="Diagonal regulariser")
    gamma_floor: float = Field(1e-8, gt=0, description="Lower bound on prior variances")
    noise_floor: float = Field(1e-6, gt=0, description="Lower bound on observation variances")
    warm_start: bool = Field(True, description="Carry gamma across an agent's refits")


class DelayConfig(BaseModel):
    """Message delivery delay distribution"""
    kind: Literal["constant", "uniform", "exponential"] = "constant"
    value: float = Field(0.0, ge=0)
    low: float = Field(0.0, ge=0)
    high: float = Field(0.0, ge=0)
    mean: float = Field(1.0, gt=0)

    @model_validator(mode='after')
    def validate_range(self):
        if self.kind == "uniform" and self.high < self.low:
            raise ValueError('uniform delay needs high >= low')
        return self


class CommsConfig(BaseModel):
    """Best-effort broadcast between agents"""
    drop_probability: float = Field(0.0, ge=0, le=1)
    delay: DelayConfig = Field(default_factory=DelayConfig)


class TimingConfig(BaseModel):
    """Sensing durations that drive asynchrony"""
    sensing_duration: float = Field(1.0, gt=0)
    duration_jitter: float = Field(0.2, ge=0)
    agent_durations: Optional[List[float]] = Field(None, description="Per-agent base durations")


class TerrainConfig(BaseModel):
    """DEM scenario with viewshed occlusion"""
    dem_file: Path
    spacing: float = Field(30.0, gt=0, description="Coarse node spacing in meters")
    observer_height: float = Field(2.0, ge=0)
    target_height: Optional[float] = Field(None, ge=0)
    visibility_threshold: float = Field(0.5, ge=0, le=1)
    fill_nodata: Optional[float] = None


class TraceConfig(BaseModel):
    """Trace contents"""
    snapshots: bool = Field(False, description="Record per-agent belief snapshots")


class MonitoringConfig(BaseModel):
    """Monitoring configuration"""
    metrics_enabled: bool = Field(False, description="Enable Prometheus metrics")
    metrics_port: int = Field(9090, ge=1024, le=65535)


class LoggingConfig(BaseModel):
    """Logging configuration"""
    level: str = Field("INFO", description="Log level")
    format: str = Field("text", description="Log format (text or json)")
    show_progress: bool = Field(True, description="Show progress indicators")

    @field_validator('level')
    @classmethod
    def validate_level(cls, v):
        allowed = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']
        if v.upper() not in allowed:
            raise ValueError(f'Log level must be one of: {", ".join(allowed)}')
        return v.upper()

    @field_validator('format')
    @classmethod
    def validate_format(cls, v):
        if v.lower() not in ['text', 'json']:
            raise ValueError('Log format must be "text" or "json"')
        return v.lower()


class ExperimentConfig(BaseModel):
    """Main experiment configuration"""
    schema_version: int = Field(SCHEMA_VERSION)
    grid: GridConfig = Field(default_factory=GridConfig)
    k: int = Field(1, ge=0, description="Number of objects of interest")
    agents: int = Field(4, ge=1, description="J, number of agents")
    policy: str = Field("nats", description="Policy for every agent")
    agent_policies: Optional[List[str]] = Field(None, description="Per-agent policy override")
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    noise_aware: bool = Field(True, description="Agents reason with the depth table")
    radius: Optional[int] = Field(None, ge=0, description="Action radius in cells, None = unbounded")
    alpha: float = Field(0.0, ge=0, description="Travel weight")
    sbl: SBLConfig = Field(default_factory=SBLConfig)
    threshold: float = Field(0.5, gt=0, lt=1, description="Recovery threshold on the posterior mean")
    trials: int = Field(40, ge=1)
    seed: int = Field(0, ge=0)
    budget: int = Field(256, ge=1, description="T, total measurement budget")
    start_cells: Optional[List[int]] = None
    comms: CommsConfig = Field(default_factory=CommsConfig)
    timing: TimingConfig = Field(default_factory=TimingConfig)
    terrain: Optional[TerrainConfig] = None
    trace: TraceConfig = Field(default_factory=TraceConfig)
    monitoring: MonitoringConfig = Field(default_factory=MonitoringConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    @field_validator('schema_version')
    @classmethod
    def validate_schema(cls, v):
        if v != SCHEMA_VERSION:
            raise ValueError(f'Unsupported schema_version {v}, expected {SCHEMA_VERSION}')
        return v

    @field_validator('policy')
    @classmethod
    def validate_policy(cls, v):
        if v.lower() not in POLICY_NAMES:
            raise ValueError(f'Policy must be one of: {", ".join(POLICY_NAMES)}')
        return v.lower()

    @field_validator('agent_policies')
    @classmethod
    def validate_agent_policies(cls, v):
        if v is None:
            return v
        bad = [p for p in v if p.lower() not in POLICY_NAMES]
        if bad:
            raise ValueError(f'Unknown policies: {", ".join(bad)}')
        return [p.lower() for p in v]

    @model_validator(mode='after')
    def validate_config(self):
        """Validate cross-field constraints"""
        if self.agent_policies is not None and len(self.agent_policies) != self.agents:
            raise ValueError('agent_policies must list one policy per agent')
        if self.start_cells is not None and len(self.start_cells) != self.agents:
            raise ValueError('start_cells must list one cell per agent')
        if self.timing.agent_durations is not None and len(self.timing.agent_durations) != self.agents:
            raise ValueError('timing.agent_durations must list one duration per agent')
        if self.terrain is None:
            cells = self.grid.rows * self.grid.cols
            if self.k > cells:
                raise ValueError(f'k={self.k} exceeds the {cells} grid cells')
            if self.start_cells and any(not 0 <= c < cells for c in self.start_cells):
                raise ValueError('start_cells must lie on the grid')
            if self.noise.metric == "meters":
                raise ValueError('noise.metric "meters" needs a terrain DEM (set terrain.dem_file or pass --dem)')
        return self

    def policy_for(self, agent_id: int) -> str:
        if self.agent_policies is not None:
            return self.agent_policies[agent_id]
        return self.policy
