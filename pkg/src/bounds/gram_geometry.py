"""
isac-fbl - Gram Matrix Geometry
Conditioning diagnostics of the active codewords that drive the sensing error.

NMSE = e_min · G_eta with G_eta = (n p_bar / k) tr(G^{-1}), G = XX^H.

Two ways to bound G_eta from a maximal correlation rho_max:
- Worst case (Gershgorin):  l_min >= n p_bar (1 − (k−1) rho_max)
                            ⇒ G_eta <= 1 / (1 − (k−1) rho_max)
- Typical case (Neumann):   tr(G^{-1}) ≈ (k + ||Δ||_F²) / (n p_bar)
                            ⇒ G_eta ≈ 1 + (k−1) rho_max²
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import structlog
from scipy import linalg

from src.bounds.codebook import ActiveSignal, correlation_matrix
from src.core.errors import (
    InvalidSpecError,
    NeumannDivergesError,
    RankDeficientError,
    WorstCaseSingularError,
)

logger = structlog.get_logger()

# l_min / l_max at or below this → G treated as singular
RANK_TOLERANCE = 1e-10


@dataclass
class GeometrySummary:
    """
    Gram matrix of the active signal with its diagnostics.

    Attributes:
        gram: Hermitian k×k G = XX^H
        eigenvalues: Ascending eigenvalues of G
        trace_inverse: tr(G^{-1}) from Cholesky solves
        geometry_factor: G_eta = (n p_bar / k) tr(G^{-1})
        gershgorin_lower: Realized Gershgorin lower bound on l_min
        neumann_trace: k + ||Δ||_F² (≈ tr(G^{-1})·n p_bar)
        n: Blocklength of X
        p_bar: Nominal power used for normalization
    """
    gram: np.ndarray
    eigenvalues: np.ndarray
    trace_inverse: float
    geometry_factor: float
    gershgorin_lower: float
    neumann_trace: float
    n: int
    p_bar: float

    @property
    def k(self) -> int:
        return self.gram.shape[0]

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def condition_number(self) -> float:
        return float(self.eigenvalues[-1] / self.eigenvalues[0])


def gram_matrix(X: ActiveSignal) -> np.ndarray:
    """G = XX^H, symmetrized to be exactly Hermitian."""
    gram = X.matrix @ X.matrix.conj().T
    return 0.5 * (gram + gram.conj().T)


def check_full_rank(eigenvalues: np.ndarray) -> None:
    """Raise RankDeficientError when l_min <= RANK_TOLERANCE · l_max."""
    l_min, l_max = float(eigenvalues[0]), float(eigenvalues[-1])
    if l_max <= 0 or l_min <= RANK_TOLERANCE * l_max:
        raise RankDeficientError(
            "Gram matrix is numerically singular",
            l_min=l_min,
            l_max=l_max,
        )


def cholesky_trace_inverse(gram: np.ndarray) -> float:
    """tr(G^{-1}) via Cholesky solves against the identity columns."""
    factor = linalg.cho_factor(gram, lower=True)
    inverse = linalg.cho_solve(factor, np.eye(gram.shape[0], dtype=gram.dtype))
    return float(np.real(np.trace(inverse)))


def _realized_gershgorin(gram: np.ndarray) -> float:
    """min_i (G_ii − Σ_{j≠i} |G_ij|), a guaranteed lower bound on l_min."""
    abs_gram = np.abs(gram)
    radii = abs_gram.sum(axis=1) - np.diag(abs_gram)
    return float(np.min(np.real(np.diag(gram)) - radii))


def summarize_geometry(X: ActiveSignal, p_bar: float) -> GeometrySummary:
    """
    Gram matrix diagnostics of the active codewords.

    Args:
        X: Active signal (k ≤ n, full row rank)
        p_bar: Nominal transmit power per channel use

    Returns:
        GeometrySummary

    Raises:
        RankDeficientError: if G is numerically singular (includes k > n)

    Example:
        >>> from src.bounds.codebook import orthogonal_codewords
        >>> s = summarize_geometry(orthogonal_codewords(64, 4, 1.0), 1.0)
        >>> round(s.geometry_factor, 9)
        1.0
    """
    if p_bar <= 0:
        raise InvalidSpecError(f"p_bar must be positive, got {p_bar}")
    k, n = X.k, X.n
    if k > n:
        raise RankDeficientError("More codewords than channel uses", k=k, n=n)
    gram = gram_matrix(X)
    eigenvalues = linalg.eigvalsh(gram)
    check_full_rank(eigenvalues)

    trace_inverse = cholesky_trace_inverse(gram)
    geometry_factor = (n * p_bar / k) * trace_inverse
    delta = correlation_matrix(gram, p_bar, n)
    neumann_trace = k + float(np.sum(np.abs(delta) ** 2))

    energies = np.real(np.diag(gram))
    if geometry_factor < 1.0 - 1e-9 and not np.allclose(energies, n * p_bar, rtol=1e-9):
        # G_eta >= 1 is only guaranteed for energy-normalized rows.
        logger.warning(
            "geometry_factor_below_one",
            geometry_factor=geometry_factor,
            mean_energy=float(energies.mean()),
            nominal_energy=n * p_bar,
        )

    summary = GeometrySummary(
        gram=gram,
        eigenvalues=eigenvalues,
        trace_inverse=trace_inverse,
        geometry_factor=geometry_factor,
        gershgorin_lower=_realized_gershgorin(gram),
        neumann_trace=neumann_trace,
        n=n,
        p_bar=p_bar,
    )
    logger.debug(
        "geometry_summarized",
        k=k,
        n=n,
        geometry_factor=geometry_factor,
        condition_number=summary.condition_number,
    )
    return summary


# =============================================================================
# WORST-CASE (GERSHGORIN) ANALYSIS
# =============================================================================

def gershgorin_min_eig_bound(
    summary: GeometrySummary,
    p_bar: float,
    n: int,
    rho_max: Optional[float] = None,
) -> float:
    """
    Gershgorin lower bound on the minimum eigenvalue of G.

    Without rho_max the bound comes from the realized Gram matrix,
    min_i (G_ii − Σ_{j≠i}|G_ij|); for rows of energy exactly n·p_bar this is
    n·p_bar·(1 − max_i Σ_{j≠i}|Δ_ij|). With a scalar rho_max the analytic
    worst case n·p_bar·(1 − (k−1)·rho_max) is returned instead.

    Returns:
        Lower bound on l_min (the realized form never exceeds the exact value)
    """
    if rho_max is not None:
        return analytic_gershgorin_bound(summary.k, rho_max, p_bar, n)
    return _realized_gershgorin(summary.gram)


def analytic_gershgorin_bound(k: int, rho_max: float, p_bar: float, n: int) -> float:
    """
    Worst-case bound n p_bar (1 − (k−1) rho_max) when all |Δ_ij| = rho_max.

    Example:
        >>> analytic_gershgorin_bound(16, 1 / 15, 1.0, 100)
        0.0
    """
    if k < 1:
        raise InvalidSpecError(f"k must be positive, got {k}")
    return n * p_bar * (1.0 - (k - 1) * rho_max)


def worst_case_geometry_factor(k: int, rho_max: float) -> float:
    """
    Worst-case geometry penalty 1 / (1 − (k−1) rho_max).

    Raises:
        WorstCaseSingularError: if (k−1)·rho_max ≥ 1

    Example:
        >>> worst_case_geometry_factor(16, 1 / 30)
        2.0
    """
    if k < 1:
        raise InvalidSpecError(f"k must be positive, got {k}")
    if rho_max < 0:
        raise InvalidSpecError(f"rho_max must be non-negative, got {rho_max}")
    load = (k - 1) * rho_max
    if load >= 1.0:
        raise WorstCaseSingularError(
            "Worst-case Gram matrix may be singular", k=k, rho_max=rho_max
        )
    return 1.0 / (1.0 - load)


# =============================================================================
# TYPICAL-CASE (NEUMANN) ANALYSIS
# =============================================================================

def typical_geometry_factor(k: int, rho_max: float) -> float:
    """
    Typical-case geometry penalty 1 + (k−1) rho_max².

    Example:
        >>> round(typical_geometry_factor(16, (1 / 15) ** 0.5), 12)
        2.0
    """
    if k < 1:
        raise InvalidSpecError(f"k must be positive, got {k}")
    if not 0.0 <= rho_max <= 1.0:
        raise InvalidSpecError(f"rho_max must lie in [0, 1], got {rho_max}")
    return 1.0 + (k - 1) * rho_max * rho_max


def correlation_energy(summary: GeometrySummary, p_bar: float, n: int) -> float:
    """Total cross-correlation energy ||Δ||_F²."""
    delta = correlation_matrix(summary.gram, p_bar, n)
    return float(np.sum(np.abs(delta) ** 2))


def neumann_trace_approx(summary: GeometrySummary, p_bar: float, n: int) -> float:
    """
    Second-order Neumann approximation (k + ||Δ||_F²) / (n p_bar) of tr(G^{-1}).

    Raises:
        NeumannDivergesError: if the spectral radius of Δ is ≥ 1
    """
    delta = correlation_matrix(summary.gram, p_bar, n)
    spectral_radius = float(np.max(np.abs(linalg.eigvalsh(delta)))) if delta.size else 0.0
    if spectral_radius >= 1.0:
        raise NeumannDivergesError(
            "Neumann series diverges", spectral_radius=spectral_radius
        )
    k = summary.gram.shape[0]
    return (k + float(np.sum(np.abs(delta) ** 2))) / (n * p_bar)


# End of Gram Matrix Geometry
