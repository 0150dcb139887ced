"""
isac-fbl - Run Configuration Validators
Cross-field checks that single-field pydantic validators cannot express.

DIFFERENCE FROM config.py VALIDATORS:
- config.py: pydantic field validators (one value at a time)
- validators.py: checks across sections (grids needed by the chosen
  experiment, sort order, k ≤ n for every Monte Carlo tuple)

These return a ValidationResult instead of raising so every problem in a file
is reported at once; parse_config turns an invalid result into
ConfigValidationError.
"""

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Sequence

import structlog

if TYPE_CHECKING:
    from src.runner.config import RunConfig

logger = structlog.get_logger()

# Below this many trials the Monte Carlo standard error is rarely useful.
MIN_USEFUL_TRIALS = 100


@dataclass
class ValidationResult:
    """
    Result of a validation check.
    """
    is_valid: bool = True
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    field_paths: List[str] = field(default_factory=list)
    info: Dict[str, Any] = field(default_factory=dict)

    def add_error(self, message: str, field_path: Optional[str] = None):
        """Add an error message, prefixed with its field path."""
        self.errors.append(f"{field_path}: {message}" if field_path else message)
        if field_path:
            self.field_paths.append(field_path)
        self.is_valid = False

    def add_warning(self, message: str):
        """Add a warning message."""
        self.warnings.append(message)

    def merge(self, other: "ValidationResult") -> "ValidationResult":
        for message in other.errors:
            self.errors.append(message)
            self.is_valid = False
        self.field_paths.extend(other.field_paths)
        self.warnings.extend(other.warnings)
        self.info.update(other.info)
        return self

    def __str__(self) -> str:
        status = "VALID" if self.is_valid else "INVALID"
        parts = [status]

        if self.errors:
            parts.append(f"Errors: {len(self.errors)}")
        if self.warnings:
            parts.append(f"Warnings: {len(self.warnings)}")

        return " | ".join(parts)


# =============================================================================
# GRID CHECKS
# =============================================================================

def validate_grid(values: Sequence[float], field_path: str, required: bool) -> ValidationResult:
    """
    Non-empty (when required) and sorted ascending.

    Example:
        >>> validate_grid([10.0, 0.0], "grids.snr_db", required=True).errors
        ['grids.snr_db: must be sorted ascending']
    """
    result = ValidationResult()
    if not values:
        if required:
            result.add_error("must not be empty for this experiment", field_path)
        return result
    if any(b < a for a, b in zip(values, values[1:])):
        result.add_error("must be sorted ascending", field_path)
    if len(set(values)) != len(values):
        result.add_warning(f"{field_path} contains duplicate values")
    return result


def validate_montecarlo_tuples(cfg: "RunConfig") -> ValidationResult:
    """Every (n, k) pair of the Monte Carlo grid needs k ≤ n."""
    result = ValidationResult()
    bad = [(n, k) for n in cfg.n_grid() for k in cfg.k_grid() if k > n]
    for n, k in bad:
        result.add_error(f"k={k} exceeds n={n}; XX^H would be singular", "grids.k")
    if cfg.trials < MIN_USEFUL_TRIALS:
        result.add_warning(f"trials={cfg.trials} gives a noisy Monte Carlo estimate")
    tuples = len(cfg.n_grid()) * len(cfg.k_grid()) * len(cfg.m_grid()) * len(cfg.snr_grid())
    result.info["rows"] = tuples
    return result


def validate_crb_sweep(cfg: "RunConfig") -> ValidationResult:
    """Codebook sizes and radio consistency for the CRB sweep."""
    result = ValidationResult()
    k = cfg.system.k
    blocklengths = sorted(set(cfg.variations.n) | {cfg.radio.n})
    for n in blocklengths:
        if k > n:
            result.add_error(f"k={k} users exceed blocklength n={n}", "variations.n")
    if cfg.radio.n != cfg.system.n or cfg.radio.m != cfg.system.m:
        result.add_warning("radio n/m differ from system n/m; the CRB sweep uses the radio values")

    rows = 0
    for name in cfg.crb.parameters:
        rows += len(_variation_values(cfg, name)) * len(cfg.grids.snr_db)
    result.info["rows"] = rows
    return result


def _variation_values(cfg: "RunConfig", parameter: str) -> list:
    return {
        "aoa": cfg.variations.m,
        "range": cfg.variations.fc,
        "velocity": cfg.variations.n,
    }[parameter]


def validate_run_config(cfg: "RunConfig") -> ValidationResult:
    """
    All cross-field checks for the selected experiment.

    Returns:
        ValidationResult; info["rows"] holds the expected CSV row count
    """
    result = ValidationResult()
    experiment = cfg.experiment
    needs_thresholds = experiment in ("tradeoff_snr", "tradeoff_surface")
    needs_snr = experiment in ("tradeoff_snr", "tradeoff_surface", "crb_sweep")

    result.merge(validate_grid(cfg.grids.e_th, "grids.e_th", required=needs_thresholds))
    result.merge(validate_grid(cfg.grids.snr_db, "grids.snr_db", required=needs_snr))
    for name in ("n", "k", "m"):
        result.merge(validate_grid(getattr(cfg.grids, name), f"grids.{name}", required=False))

    if needs_thresholds and cfg.system.k < 2:
        result.add_error("tradeoff bounds need at least two active users", "system.k")

    if needs_thresholds:
        surface = len(cfg.n_grid()) if experiment == "tradeoff_surface" else 1
        result.info["rows"] = surface * len(cfg.grids.e_th) * len(cfg.grids.snr_db)
    elif experiment == "montecarlo_verify":
        result.merge(validate_montecarlo_tuples(cfg))
    elif experiment == "crb_sweep":
        for name in ("m", "fc", "n"):
            result.merge(validate_grid(getattr(cfg.variations, name), f"variations.{name}", required=True))
        result.merge(validate_crb_sweep(cfg))

    if result.is_valid:
        logger.debug("run_config_validated", experiment=experiment, warnings=len(result.warnings))
    else:
        logger.error("run_config_invalid", experiment=experiment, errors=result.errors)
    return result


# End of Run Configuration Validators
