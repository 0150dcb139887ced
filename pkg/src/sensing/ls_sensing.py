"""
isac-fbl - Least-Squares Channel Sensing
Unbiased LS channel estimate, the analytic NMSE decomposition and a Monte Carlo
verifier for it.

Y = H X + N with H (m×k), X (k×n), N (m×n) AWGN of variance sigma_n2.

    H_hat = Y X^H (X X^H)^{-1}
    NMSE  = e_min · G_eta,  e_min = sigma_n2 / (n p_bar sigma_H2)

Monte Carlo trials are keyed by (seed, trial) and reduced in trial order, so a
run gives the same number for any worker count.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Literal, Optional

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, computed_field
from scipy import linalg

from src.bounds.codebook import ActiveSignal
from src.bounds.gram_geometry import (
    GeometrySummary,
    check_full_rank,
    gram_matrix,
    summarize_geometry,
)
from src.core.errors import InvalidSpecError, RankDeficientError
from src.core.seeding import TRIAL_STREAM, spawn_generator

logger = structlog.get_logger()

NmseNormalization = Literal["expected", "realized"]


# =============================================================================
# DOMAIN TYPES
# =============================================================================

class SystemConfig(BaseModel):
    """
    Common parameter record for every bound.

    SNR is defined on the transmitter side, SNR = p_bar / sigma_n2.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(default=1000, ge=1, description="Channel uses")
    k: int = Field(default=16, ge=1, description="Active users")
    m: int = Field(default=10, ge=1, description="Receive antennas")
    p_bar: float = Field(default=10.0, gt=0, description="Transmit power per channel use (linear)")
    sigma_n2: float = Field(default=1.0, gt=0, description="Noise variance")
    sigma_H2: float = Field(default=1.0, gt=0, description="Channel entry variance")

    @computed_field
    @property
    def snr_db(self) -> float:
        """10·log10(p_bar / sigma_n2)."""
        return 10.0 * math.log10(self.p_bar / self.sigma_n2)

    @property
    def snr_linear(self) -> float:
        return self.p_bar / self.sigma_n2

    @property
    def e_min(self) -> float:
        """Orthogonal-codeword NMSE floor sigma_n2 / (n p_bar sigma_H2)."""
        return self.sigma_n2 / (self.n * self.p_bar * self.sigma_H2)

    def with_snr_db(self, snr_db: float) -> "SystemConfig":
        """Copy at another SNR (p_bar adjusted, sigma_n2 kept)."""
        return self.model_copy(update={"p_bar": self.sigma_n2 * 10.0 ** (snr_db / 10.0)})

    def with_n(self, n: int) -> "SystemConfig":
        """Copy at another blocklength."""
        if n < 1:
            raise InvalidSpecError(f"n must be a positive integer, got {n}")
        return self.model_copy(update={"n": int(n)})

    @classmethod
    def from_snr_db(cls, snr_db: float, sigma_n2: float = 1.0, **fields) -> "SystemConfig":
        """Build a config from an SNR in dB instead of p_bar."""
        return cls(p_bar=sigma_n2 * 10.0 ** (snr_db / 10.0), sigma_n2=sigma_n2, **fields)


@dataclass
class NmseBreakdown:
    """
    NMSE = e_min · geometry_factor, optionally with a Monte Carlo estimate.

    Attributes:
        e_min: Orthogonal floor
        geometry_factor: G_eta of the codewords
        nmse_analytic: e_min · geometry_factor
        nmse_empirical: Monte Carlo mean (None for analytic-only)
        trials: Monte Carlo trial count (None for analytic-only)
        std_error: Standard error of nmse_empirical
    """
    e_min: float
    geometry_factor: float
    nmse_analytic: float
    nmse_empirical: Optional[float] = None
    trials: Optional[int] = None
    std_error: Optional[float] = None

    @property
    def relative_error(self) -> Optional[float]:
        if self.nmse_empirical is None:
            return None
        return abs(self.nmse_empirical - self.nmse_analytic) / self.nmse_analytic


# =============================================================================
# ESTIMATION
# =============================================================================

def _gram_factor(X: ActiveSignal):
    """Cholesky factor of XX^H after the shared rank check."""
    if X.k > X.n:
        raise RankDeficientError("More codewords than channel uses", k=X.k, n=X.n)
    gram = gram_matrix(X)
    check_full_rank(linalg.eigvalsh(gram))
    return linalg.cho_factor(gram, lower=True)


def _ls_solve(Y: np.ndarray, X: ActiveSignal, factor) -> np.ndarray:
    # H_hat^H = G^{-1} X Y^H  (G Hermitian)
    rhs = X.matrix @ Y.conj().T
    return linalg.cho_solve(factor, rhs).conj().T


def ls_estimate(Y: np.ndarray, X: ActiveSignal) -> np.ndarray:
    """
    Unbiased LS estimate Y X^H (XX^H)^{-1}.

    Args:
        Y: Received m×n matrix
        X: Active signal (full row rank)

    Returns:
        Estimated m×k channel

    Raises:
        RankDeficientError: if XX^H is numerically singular
    """
    Y = np.asarray(Y, dtype=np.complex128)
    if Y.ndim != 2 or Y.shape[1] != X.n:
        raise InvalidSpecError(f"Y must be m×{X.n}, got shape {Y.shape}")
    return _ls_solve(Y, X, _gram_factor(X))


def complex_gaussian(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    """i.i.d. CN(0, variance) samples."""
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


# =============================================================================
# NMSE
# =============================================================================

def analytic_nmse(cfg: SystemConfig, summary: GeometrySummary) -> NmseBreakdown:
    """
    NMSE decomposition e_min · G_eta.

    Example:
        >>> cfg = SystemConfig(n=1000, p_bar=10.0, sigma_n2=1.0, sigma_H2=1.0)
        >>> cfg.e_min
        0.0001
    """
    e_min = cfg.e_min
    geometry_factor = summary.geometry_factor
    return NmseBreakdown(
        e_min=e_min,
        geometry_factor=geometry_factor,
        nmse_analytic=e_min * geometry_factor,
    )


def _trial_nmse(
    trial: int,
    cfg: SystemConfig,
    X: ActiveSignal,
    factor,
    seed: int,
    fixed_h: Optional[np.ndarray],
    normalization: NmseNormalization,
) -> float:
    rng = spawn_generator(seed, TRIAL_STREAM, trial)
    if fixed_h is None:
        H = complex_gaussian(rng, (cfg.m, X.k), cfg.sigma_H2)
    else:
        H = fixed_h
    N = complex_gaussian(rng, (cfg.m, X.n), cfg.sigma_n2)
    H_hat = _ls_solve(H @ X.matrix + N, X, factor)
    error_energy = float(np.sum(np.abs(H_hat - H) ** 2))
    if normalization == "realized":
        return error_energy / float(np.sum(np.abs(H) ** 2))
    return error_energy / (cfg.m * X.k * cfg.sigma_H2)


def monte_carlo_nmse(
    cfg: SystemConfig,
    X: ActiveSignal,
    trials: int,
    seed: int,
    workers: int = 1,
    normalization: NmseNormalization = "expected",
    fixed_h: bool = False,
) -> NmseBreakdown:
    """
    Simulated LS estimation error against the analytic decomposition.

    Each trial draws H (unless fixed_h) and N from its own stream
    (seed, trial). With normalization="expected" the per-trial value is
    ||H_hat − H||_F² / (m k sigma_H2), an unbiased estimate of the NMSE;
    "realized" divides by ||H||_F² instead, which is biased upward by
    mk/(mk − 1) for Gaussian H.

    Args:
        cfg: System parameters (m, sigma_n2, sigma_H2 and p_bar are used)
        X: Active signal
        trials: Number of trials (≥ 1)
        seed: 64-bit unsigned seed
        workers: Thread count; results do not depend on it
        normalization: "expected" or "realized"
        fixed_h: Draw H once (from trial stream 0) and reuse it

    Returns:
        NmseBreakdown with nmse_empirical, trials and std_error filled
    """
    if trials < 1:
        raise InvalidSpecError(f"trials must be ≥ 1, got {trials}")
    if normalization not in ("expected", "realized"):
        raise InvalidSpecError(f"Unknown normalization '{normalization}'")

    if cfg.n != X.n:
        raise InvalidSpecError(f"cfg.n={cfg.n} does not match the signal blocklength {X.n}")

    factor = _gram_factor(X)
    breakdown = analytic_nmse(cfg, summarize_geometry(X, cfg.p_bar))

    h_fixed = None
    if fixed_h:
        h_fixed = complex_gaussian(spawn_generator(seed, TRIAL_STREAM, 0), (cfg.m, X.k), cfg.sigma_H2)

    def run(trial: int) -> float:
        return _trial_nmse(trial, cfg, X, factor, seed, h_fixed, normalization)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = np.fromiter(pool.map(run, range(trials)), dtype=float, count=trials)
    else:
        values = np.fromiter(map(run, range(trials)), dtype=float, count=trials)

    empirical = float(values.mean())
    std_error = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else None

    result = replace(breakdown, nmse_empirical=empirical, trials=trials, std_error=std_error)
    logger.info(
        "monte_carlo_nmse_done",
        n=X.n,
        k=X.k,
        m=cfg.m,
        trials=trials,
        nmse_analytic=result.nmse_analytic,
        nmse_empirical=empirical,
        relative_error=result.relative_error,
    )
    return result


# End of Least-Squares Channel Sensing
