"""
isac-fbl - Error Hierarchy

Every failure raised by the library derives from IsacError so callers (and the
CLI exit-code mapping) can tell precondition violations, numerical breakdowns,
configuration problems and output failures apart.

    IsacError
    ├── InvalidSpecError          (ValueError)
    ├── NumericalError            (ArithmeticError)
    │   ├── DegenerateCodebookError
    │   ├── RankDeficientError
    │   ├── SingularGramError
    │   ├── WorstCaseSingularError
    │   ├── NeumannDivergesError
    │   └── SingularFIMError
    ├── ConfigError
    │   ├── ConfigParseError
    │   └── ConfigValidationError (ValueError)
    └── OutputError               (OSError)
"""

from typing import Any, Dict, Optional


class IsacError(Exception):
    """Base class for all isac-fbl errors."""

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.context: Dict[str, Any] = dict(context)

    def with_context(self, **context: Any) -> "IsacError":
        """Attach extra context (e.g. the sweep coordinate) and return self."""
        self.context.update(context)
        return self

    def __str__(self) -> str:
        base = super().__str__()
        if not self.context:
            return base
        details = ", ".join(f"{key}={value}" for key, value in self.context.items())
        return f"{base} [{details}]"


class InvalidSpecError(IsacError, ValueError):
    """A parameter record or argument violates its documented precondition."""


# =============================================================================
# NUMERICAL FAILURES
# =============================================================================

class NumericalError(IsacError, ArithmeticError):
    """A formula is undefined for the given inputs."""


class DegenerateCodebookError(NumericalError):
    """ln t ≤ 0 in the closed-form maximal correlation (codebook too small)."""


class RankDeficientError(NumericalError):
    """The Gram matrix XX^H is numerically singular; LS estimation is undefined."""


class SingularGramError(NumericalError):
    """The Gram matrix handed to the CRB is not positive definite."""


class WorstCaseSingularError(NumericalError):
    """(k−1)·ρ_max ≥ 1: the worst-case Gram matrix may be singular."""


class NeumannDivergesError(NumericalError):
    """Spectral radius of Δ ≥ 1: the Neumann series for (I+Δ)^{-1} diverges."""


class SingularFIMError(NumericalError):
    """The Fisher information matrix is singular (unidentifiable parameters)."""


# =============================================================================
# CONFIGURATION / OUTPUT FAILURES
# =============================================================================

class ConfigError(IsacError):
    """Base class for run-configuration problems."""


class ConfigParseError(ConfigError):
    """The configuration file is missing or is not well-formed YAML."""


class ConfigValidationError(ConfigError, ValueError):
    """The configuration parsed but failed validation."""

    def __init__(self, message: str, field_path: Optional[str] = None, **context: Any):
        super().__init__(message, **context)
        self.field_path = field_path


class OutputError(IsacError, OSError):
    """Writing an experiment artifact failed."""
