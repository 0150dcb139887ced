"""
isac-fbl - Gaussian Random Codebook
Active-user codewords and the correlation <-> bits calculus.

Every user maps b bits into a common codebook of 2^b rows with i.i.d.
CN(0, p_bar) entries; only the k active rows are ever drawn. The full-codebook
statistics enter solely through the maximal-correlation formulas:

- Closed form:  rho_max = sqrt(ln t / n) + gamma / (2 sqrt(n ln t)),
                t = 2^b (2^b - 1) / 2
- Approximate:  rho_max ≈ sqrt(2 b ln 2 / n)         (2^b >> 1)
- Inverse:      b = n rho^2 / (2 ln 2)

Usage:
    >>> from src.bounds.codebook import rho_max_approx, bits_from_rho
    >>> rho = rho_max_approx(50, 1000)
    >>> round(bits_from_rho(rho, 1000), 6)
    50.0
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core.errors import DegenerateCodebookError, InvalidSpecError
from src.core.seeding import CODEBOOK_STREAM, spawn_generator

logger = structlog.get_logger()

# Gumbel correction of the maximal-correlation extreme value
EULER_GAMMA = 0.5772156649

LN2 = math.log(2.0)


# =============================================================================
# DOMAIN TYPES
# =============================================================================

class CodebookSpec(BaseModel):
    """
    Parameters of the random Gaussian codebook.

    b may be fractional for bound computations; it is floored only when the
    k <= 2^floor(b) materialization check applies.
    """
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="Channel uses per codeword")
    k: int = Field(..., ge=1, description="Active users")
    p_bar: float = Field(..., gt=0, description="Average transmit power per channel use (linear)")
    b: Optional[float] = Field(default=None, gt=0, description="Information bits per user")
    seed: int = Field(default=0, ge=0, le=2**64 - 1, description="64-bit unsigned seed")

    @model_validator(mode="after")
    def _check_codebook_size(self) -> "CodebookSpec":
        if self.b is not None and self.k > 2 ** math.floor(self.b):
            raise ValueError(
                f"k={self.k} active users exceed the 2^floor(b)={2 ** math.floor(self.b)} codewords"
            )
        return self


@dataclass
class ActiveSignal:
    """The k×n transmitted matrix X (active rows of the codebook)."""
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.complex128)
        if self.matrix.ndim != 2:
            raise InvalidSpecError(f"ActiveSignal must be 2-D, got shape {self.matrix.shape}")

    @property
    def k(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    def scaled(self, factor: float) -> "ActiveSignal":
        """Amplitude-scaled copy (power scales by factor²)."""
        return ActiveSignal(self.matrix * factor)


@dataclass
class CorrelationReport:
    """Normalized off-diagonal correlations Δ = G/(n p_bar) − I (zero diagonal)."""
    delta: np.ndarray
    rho_max_empirical: float


# =============================================================================
# CODEWORD GENERATION
# =============================================================================

def sample_active_codewords(spec: CodebookSpec, rng_seed: Optional[int] = None) -> ActiveSignal:
    """
    Draw the k active rows of the Gaussian codebook.

    Entries are i.i.d. circularly-symmetric CN(0, p_bar). Output depends only on
    the seed (rng_seed if given, else spec.seed).

    Args:
        spec: Codebook parameters
        rng_seed: Optional override of spec.seed

    Returns:
        ActiveSignal of shape k×n

    Example:
        >>> X = sample_active_codewords(CodebookSpec(n=4, k=1, p_bar=1.0, seed=0))
        >>> X.matrix.shape
        (1, 4)
    """
    seed = spec.seed if rng_seed is None else rng_seed
    if spec.k > spec.n:
        # Not fatal here: the rows are still valid, but XX^H will be singular.
        logger.warning("codewords_exceed_blocklength", k=spec.k, n=spec.n)

    rng = spawn_generator(seed, CODEBOOK_STREAM)
    scale = math.sqrt(spec.p_bar / 2.0)
    real = rng.standard_normal((spec.k, spec.n))
    imag = rng.standard_normal((spec.k, spec.n))
    matrix = scale * (real + 1j * imag)

    logger.debug("codewords_sampled", n=spec.n, k=spec.k, p_bar=spec.p_bar, seed=seed)
    return ActiveSignal(matrix)


def orthogonal_codewords(n: int, k: int, p_bar: float) -> ActiveSignal:
    """
    k mutually orthogonal codewords with row energy exactly n·p_bar.

    Rows are the first k rows of the n-point DFT matrix scaled by sqrt(p_bar),
    so XX^H = n·p_bar·I up to round-off.
    """
    if k > n:
        raise InvalidSpecError(f"At most n={n} orthogonal codewords exist, requested k={k}")
    if p_bar <= 0:
        raise InvalidSpecError(f"p_bar must be positive, got {p_bar}")
    rows = np.arange(k)[:, None]
    cols = np.arange(n)[None, :]
    matrix = math.sqrt(p_bar) * np.exp(-2j * np.pi * ((rows * cols) % n) / n)
    return ActiveSignal(matrix)


def normalize_energy(X: ActiveSignal, p_bar: float) -> ActiveSignal:
    """Rescale every row of X to energy exactly n·p_bar."""
    norms = np.linalg.norm(X.matrix, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise InvalidSpecError("Cannot energy-normalize an all-zero codeword")
    return ActiveSignal(X.matrix * (math.sqrt(X.n * p_bar) / norms))


# =============================================================================
# CORRELATION <-> BITS CALCULUS
# =============================================================================

def rho_max_closed(b: float, n: int, gamma: float = EULER_GAMMA) -> float:
    """
    Closed-form maximal codeword correlation of a 2^b-row random codebook.

    Args:
        b: Information bits per user (real)
        n: Blocklength
        gamma: Extreme-value correction constant

    Returns:
        sqrt(ln t / n) + gamma / (2 sqrt(n ln t)) with t = 2^b (2^b − 1) / 2

    Raises:
        DegenerateCodebookError: if ln t ≤ 0

    Example:
        >>> round(rho_max_closed(10, 1000), 4)
        0.1173
    """
    if n < 1:
        raise InvalidSpecError(f"n must be a positive integer, got {n}")
    # ln t = 2b ln2 + ln(1 − 2^−b) − ln2, never forming 2^b; t ≤ 1 whenever b ≤ 1
    ln_t = 2.0 * b * LN2 + math.log1p(-(2.0 ** -b)) - LN2 if b > 1 else 0.0
    if ln_t <= 0.0:
        raise DegenerateCodebookError(
            f"Codebook with b={b} has ln t={ln_t:.4g}; ln t must be positive", b=b, ln_t=ln_t
        )
    return math.sqrt(ln_t / n) + gamma / (2.0 * math.sqrt(n * ln_t))


def rho_max_approx(b: float, n: int) -> float:
    """
    Large-codebook maximal correlation sqrt(2 b ln2 / n).

    Strictly increasing in b and decreasing in n; b = 0 gives 0.

    Example:
        >>> round(rho_max_approx(50, 1000), 5)
        0.26328
    """
    if b < 0:
        raise InvalidSpecError(f"b must be non-negative, got {b}")
    if n < 1:
        raise InvalidSpecError(f"n must be a positive integer, got {n}")
    return math.sqrt(2.0 * b * LN2 / n)


def bits_from_rho(rho: float, n: int) -> float:
    """
    Supportable bits for a permissible correlation, n rho^2 / (2 ln 2).

    Exact inverse of rho_max_approx.

    Example:
        >>> round(bits_from_rho(1 / 30, 1000), 4)
        0.8015
    """
    if rho <= 0:
        raise InvalidSpecError(f"rho must be positive, got {rho}")
    if n < 1:
        raise InvalidSpecError(f"n must be a positive integer, got {n}")
    return n * rho * rho / (2.0 * LN2)


def matching_bits(k: int) -> float:
    """
    Bits b whose codebook has exactly as many pairs as k sampled rows.

    2^b (2^b − 1)/2 = k (k − 1)/2  ⇔  b = log2 k.
    """
    if k < 2:
        raise InvalidSpecError(f"Need at least two rows to form a pair, got k={k}")
    return math.log2(k)


def empirical_correlation(X: ActiveSignal, p_bar: float) -> CorrelationReport:
    """
    Normalized pairwise correlations of the active codewords.

    Normalization uses the nominal energy n·p_bar, matching G = n p_bar (I + Δ).
    The diagonal of Δ is forced to exactly zero and Δ is symmetrized so it is
    exactly Hermitian.

    Returns:
        CorrelationReport with Δ and max_{i≠j} |Δ_ij| (0 for a single user)
    """
    if p_bar <= 0:
        raise InvalidSpecError(f"p_bar must be positive, got {p_bar}")
    gram = X.matrix @ X.matrix.conj().T
    delta = correlation_matrix(gram, p_bar, X.n)

    if X.k < 2:
        logger.warning("single_user_correlation", k=X.k)
        return CorrelationReport(delta=delta, rho_max_empirical=0.0)

    rho = float(np.max(np.abs(delta)))
    logger.debug("correlation_measured", k=X.k, n=X.n, rho_max=rho)
    return CorrelationReport(delta=delta, rho_max_empirical=rho)


def correlation_matrix(gram: np.ndarray, p_bar: float, n: int) -> np.ndarray:
    """Δ = G/(n p_bar) − I with zero diagonal, exactly Hermitian."""
    delta = np.asarray(gram, dtype=np.complex128) / (n * p_bar)
    delta = 0.5 * (delta + delta.conj().T)
    np.fill_diagonal(delta, 0.0)
    return delta


# End of Gaussian Random Codebook
