"""
isac-fbl - Run Configuration
YAML experiment files parsed into validated pydantic records.

Every section forbids unknown keys: a misspelt grid name is an error, never a
silently ignored default. Omitted radio and system fields take the default
evaluation settings (fc = 28 GHz, c = 3e8 m/s, Ts = 4 μs, n = 1000, m = 10,
k = 16, sigma_n2 = sigma_H2 = 1).

Canonical file layout:

    experiment: tradeoff_snr        # tradeoff_surface | montecarlo_verify | crb_sweep
    seed: 0
    trials: 1000
    output_path: results/tradeoff_snr.csv
    system:  {n: 1000, k: 16, m: 10, p_bar: 10.0, sigma_n2: 1.0, sigma_H2: 1.0}
    grids:   {e_th: [...], snr_db: [...], n: [...], k: [...], m: [...]}
    radio:   {fc: 2.8e+10, c: 3.0e+8, Ts: 4.0e-06, n: 1000, m: 10, d_a: null}
    variations: {m: [8, 64, 128], fc: [3.0e+9, 2.8e+10, 6.0e+10], n: [200, 800, 3200]}
    crb:     {codebook: random, parameters: [aoa, range, velocity]}
"""

from pathlib import Path
from typing import List, Literal, Optional, Union

import structlog
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.core.errors import ConfigParseError, ConfigValidationError
from src.runner.validators import validate_run_config
from src.sensing.channel_3gpp import RadioConfig
from src.sensing.crb import PARAMETER_NAMES
from src.sensing.ls_sensing import SystemConfig

logger = structlog.get_logger()

ExperimentKind = Literal["tradeoff_snr", "tradeoff_surface", "montecarlo_verify", "crb_sweep"]
CodebookKind = Literal["random", "orthogonal"]
ParameterName = Literal["aoa", "range", "velocity"]

EXPERIMENTS = ("tradeoff_snr", "tradeoff_surface", "montecarlo_verify", "crb_sweep")


# =============================================================================
# SECTIONS
# =============================================================================

class GridsConfig(BaseModel):
    """Sweep grids; an empty n/k/m grid means the single system value."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    e_th: List[float] = Field(default_factory=list, description="Sensing NMSE thresholds")
    snr_db: List[float] = Field(default_factory=list, description="SNR points in dB")
    n: List[int] = Field(default_factory=list, description="Blocklengths")
    k: List[int] = Field(default_factory=list, description="Active users (Monte Carlo)")
    m: List[int] = Field(default_factory=list, description="Antennas (Monte Carlo)")

    @field_validator("e_th")
    @classmethod
    def _positive_thresholds(cls, v: List[float]) -> List[float]:
        for value in v:
            if not value > 0:
                raise ValueError(f"thresholds must be positive, got {value}")
        return v

    @field_validator("n", "k", "m")
    @classmethod
    def _positive_counts(cls, v: List[int]) -> List[int]:
        for value in v:
            if value < 1:
                raise ValueError(f"counts must be positive integers, got {value}")
        return v


class VariationsConfig(BaseModel):
    """Per-parameter variations of the CRB sweep."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    m: List[int] = Field(default_factory=lambda: [8, 64, 128], description="Antennas (AoA rows)")
    fc: List[float] = Field(default_factory=lambda: [3e9, 28e9, 60e9], description="Carriers in Hz (range rows)")
    n: List[int] = Field(default_factory=lambda: [200, 800, 3200], description="Blocklengths (velocity rows)")

    @field_validator("m", "fc", "n")
    @classmethod
    def _positive(cls, v: list) -> list:
        if not v:
            raise ValueError("variation lists must not be empty")
        for value in v:
            if not value > 0:
                raise ValueError(f"variation values must be positive, got {value}")
        return v


class CrbConfig(BaseModel):
    """Codebook and parameter selection of the CRB sweep."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    codebook: CodebookKind = "random"
    parameters: List[ParameterName] = Field(default_factory=lambda: list(PARAMETER_NAMES))

    @field_validator("parameters")
    @classmethod
    def _canonical_order(cls, v: List[str]) -> List[str]:
        if not v:
            raise ValueError("at least one parameter is required")
        if len(set(v)) != len(v):
            raise ValueError("parameters must not repeat")
        return [name for name in PARAMETER_NAMES if name in v]


class RunConfig(BaseModel):
    """One experiment run."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    experiment: ExperimentKind
    seed: int = Field(default=0, ge=0, le=2**64 - 1, description="64-bit unsigned seed")
    trials: int = Field(default=1000, ge=1, description="Monte Carlo trials per tuple")
    output_path: Optional[str] = Field(default=None, description="CSV destination; None = stdout")
    system: SystemConfig = Field(default_factory=SystemConfig)
    grids: GridsConfig = Field(default_factory=GridsConfig)
    radio: RadioConfig = Field(default_factory=RadioConfig)
    variations: VariationsConfig = Field(default_factory=VariationsConfig)
    crb: CrbConfig = Field(default_factory=CrbConfig)

    def n_grid(self) -> List[int]:
        return list(self.grids.n) or [self.system.n]

    def k_grid(self) -> List[int]:
        return list(self.grids.k) or [self.system.k]

    def m_grid(self) -> List[int]:
        return list(self.grids.m) or [self.system.m]

    def snr_grid(self) -> List[float]:
        return list(self.grids.snr_db) or [self.system.snr_db]


# =============================================================================
# LOADING / DUMPING
# =============================================================================

def _field_path(error: dict) -> str:
    return ".".join(str(part) for part in error["loc"])


def parse_config(text: str, experiment: Optional[str] = None, source: str = "<string>") -> RunConfig:
    """
    Parse and validate YAML text.

    Args:
        text: YAML document
        experiment: Experiment implied by the caller (CLI subcommand); fills a
            missing `experiment` key and must agree with a present one
        source: Name used in error messages

    Raises:
        ConfigParseError: if the text is not a YAML mapping
        ConfigValidationError: on schema or cross-field violations
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigParseError(f"Malformed YAML in {source}: {exc}", source=source) from exc

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigParseError(f"{source} must contain a mapping at the top level", source=source)

    if experiment is not None:
        declared = data.get("experiment")
        if declared is not None and declared != experiment:
            raise ConfigValidationError(
                f"experiment: config declares '{declared}' but '{experiment}' was requested",
                field_path="experiment",
            )
        data = {**data, "experiment": experiment}

    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        path = _field_path(first)
        raise ConfigValidationError(
            f"{path}: {first['msg']}", field_path=path, source=source, errors=exc.error_count()
        ) from exc

    result = validate_run_config(cfg)
    for warning in result.warnings:
        logger.warning("config_warning", source=source, detail=warning)
    if not result.is_valid:
        path = result.field_paths[0] if result.field_paths else None
        raise ConfigValidationError("; ".join(result.errors), field_path=path, source=source)

    logger.debug("config_loaded", source=source, experiment=cfg.experiment, **result.info)
    return cfg


def load_config(path: Union[str, Path], experiment: Optional[str] = None) -> RunConfig:
    """
    Read a run configuration file.

    Raises:
        ConfigParseError: if the file cannot be read or is malformed
        ConfigValidationError: if validation fails (message names the field path)
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParseError(f"Cannot read config {path}: {exc.strerror}", source=str(path)) from exc
    return parse_config(text, experiment=experiment, source=str(path))


def canonical_dict(cfg: RunConfig) -> dict:
    """Fully-defaulted plain-data form (derived snr_db omitted)."""
    return cfg.model_dump(mode="json", exclude={"system": {"snr_db"}})


def dump_config(cfg: RunConfig) -> str:
    """Canonical YAML; parse_config(dump_config(cfg)) == cfg."""
    return yaml.safe_dump(canonical_dict(cfg), sort_keys=True, default_flow_style=False)


# End of Run Configuration
