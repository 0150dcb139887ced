"""
isac-fbl - Communication-Sensing Tradeoff Bounds
Rate vs sensing threshold vs SNR for uplink ISAC multiple access.

Formulas (per user, bits per channel use):
- Achievability:  rho_achi = (1/(k−1)) (1 − e_min/e_th)
                  rate_achi = bits_from_rho(rho_achi, n) / n
- Converse:       rho_conv = sqrt((1/(k−1)) (e_th/e_min − 1))
                  rate_conv = min(bits_from_rho(rho_conv, n) / n, shannon)
- Shannon:        m >= k:  log2(1 + m sigma_H2 SNR)
                  m <  k:  (m/k) log2(1 + k sigma_H2 SNR)

Thresholds e_th ≤ e_min form the silent region: no positive rate meets the
sensing requirement there.

Usage:
    >>> from src.bounds.tradeoff_bounds import achievability_point
    >>> from src.sensing.ls_sensing import SystemConfig
    >>> achievability_point(2e-4, SystemConfig(n=1000, k=16, m=10, p_bar=10.0))
    BoundPoint(rho=0.0333..., rate=0.000801..., silent=False)
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np
import structlog

from src.bounds.codebook import bits_from_rho
from src.core.errors import InvalidSpecError
from src.core.seeding import CAPACITY_STREAM, spawn_generator
from src.sensing.ls_sensing import SystemConfig, complex_gaussian

logger = structlog.get_logger()


class BoundPoint(NamedTuple):
    """Permissible correlation, per-user rate and silent flag of one bound."""
    rho: float
    rate: float
    silent: bool


@dataclass
class TradeoffPoint:
    """
    Both bounds at one (n, SNR, e_th) coordinate.

    Rates are per user in bits per channel use; silent flags are true exactly
    when the corresponding rate is 0.
    """
    n: int
    snr_db: float
    e_th: float
    e_min: float
    rho_achi: float
    rho_conv: float
    rate_achi: float
    rate_conv: float
    shannon_rate: float
    silent_achi: bool
    silent_conv: bool

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


def _require_multiuser(cfg: SystemConfig) -> None:
    if cfg.k < 2:
        raise InvalidSpecError(f"Tradeoff bounds need k ≥ 2 active users, got k={cfg.k}")


def _require_threshold(e_th: float) -> None:
    if not e_th > 0:
        raise InvalidSpecError(f"e_th must be positive, got {e_th}")


# =============================================================================
# SINGLE-POINT BOUNDS
# =============================================================================

def shannon_per_user(cfg: SystemConfig) -> float:
    """
    Per-user Shannon ceiling from the Jensen-bounded ergodic sum capacity.

    Example:
        >>> round(shannon_per_user(SystemConfig(m=10, k=16, p_bar=10.0)), 3)
        4.582
    """
    snr = cfg.snr_linear
    if cfg.m >= cfg.k:
        return math.log2(1.0 + cfg.m * cfg.sigma_H2 * snr)
    return (cfg.m / cfg.k) * math.log2(1.0 + cfg.k * cfg.sigma_H2 * snr)


def energy_per_bit(cfg: SystemConfig, b: float) -> float:
    """
    Eb/N0 = n p_bar / (b sigma_n2), linear.

    Example:
        >>> energy_per_bit(SystemConfig(n=1000, p_bar=10.0, sigma_n2=1.0), 100)
        100.0
    """
    if not b > 0:
        raise InvalidSpecError(f"b must be positive, got {b}")
    return cfg.n * cfg.p_bar / (b * cfg.sigma_n2)


def energy_per_bit_db(cfg: SystemConfig, b: float) -> float:
    """Eb/N0 in dB."""
    return 10.0 * math.log10(energy_per_bit(cfg, b))


def achievability_point(e_th: float, cfg: SystemConfig) -> BoundPoint:
    """
    Worst-case (Gershgorin) achievable rate for sensing threshold e_th.

    Returns:
        BoundPoint; silent with rate 0 when e_th ≤ e_min
    """
    _require_threshold(e_th)
    _require_multiuser(cfg)

    rho = (1.0 - cfg.e_min / e_th) / (cfg.k - 1)
    rho = min(rho, 1.0)
    if rho <= 0.0:
        return BoundPoint(rho=0.0, rate=0.0, silent=True)
    return BoundPoint(rho=rho, rate=bits_from_rho(rho, cfg.n) / cfg.n, silent=False)


def converse_point(e_th: float, cfg: SystemConfig) -> BoundPoint:
    """
    Typical-case (Neumann) rate ceiling for sensing threshold e_th, capped by
    the Shannon ceiling.

    An unclamped rho_conv above 1 means the sensing constraint does not bind and
    the Shannon ceiling alone sets the rate; the reported rho is clamped to 1.
    """
    _require_threshold(e_th)
    _require_multiuser(cfg)

    e_min = cfg.e_min
    if e_th <= e_min:
        return BoundPoint(rho=0.0, rate=0.0, silent=True)

    ceiling = shannon_per_user(cfg)
    rho = math.sqrt((e_th / e_min - 1.0) / (cfg.k - 1))
    if rho > 1.0:
        return BoundPoint(rho=1.0, rate=ceiling, silent=False)

    sensing_rate = bits_from_rho(rho, cfg.n) / cfg.n
    return BoundPoint(rho=rho, rate=min(sensing_rate, ceiling), silent=False)


def tradeoff_point(e_th: float, cfg: SystemConfig, snr_db: Optional[float] = None) -> TradeoffPoint:
    """
    Both bounds plus the Shannon ceiling at one coordinate.

    snr_db labels the point (defaults to cfg.snr_db); sweeps pass the grid value
    so the label is not subject to the dB round trip.
    """
    achi = achievability_point(e_th, cfg)
    conv = converse_point(e_th, cfg)
    point = TradeoffPoint(
        n=cfg.n,
        snr_db=cfg.snr_db if snr_db is None else snr_db,
        e_th=e_th,
        e_min=cfg.e_min,
        rho_achi=achi.rho,
        rho_conv=conv.rho,
        rate_achi=achi.rate,
        rate_conv=conv.rate,
        shannon_rate=shannon_per_user(cfg),
        silent_achi=achi.silent,
        silent_conv=conv.silent,
    )
    if point.rate_achi > point.rate_conv and not point.silent_conv:
        logger.warning(
            "achievability_exceeds_converse",
            n=cfg.n,
            snr_db=cfg.snr_db,
            e_th=e_th,
            rate_achi=point.rate_achi,
            rate_conv=point.rate_conv,
        )
    return point


# =============================================================================
# SWEEPS
# =============================================================================

def _check_grid(name: str, grid: Sequence[float]) -> List[float]:
    values = [float(v) for v in grid]
    if not values:
        raise InvalidSpecError(f"Grid '{name}' must not be empty")
    if any(b < a for a, b in zip(values, values[1:])):
        raise InvalidSpecError(f"Grid '{name}' must be sorted ascending")
    return values


def _run_ordered(fn, items: Sequence, workers: int) -> list:
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def tradeoff_sweep(
    cfg: SystemConfig,
    e_th_grid: Sequence[float],
    snr_db_grid: Sequence[float],
    workers: int = 1,
) -> List[TradeoffPoint]:
    """
    Cartesian sweep over SNR and e_th at the configuration's blocklength.

    Args:
        cfg: Base configuration (p_bar is replaced per SNR point)
        e_th_grid: Ascending sensing thresholds
        snr_db_grid: Ascending SNR values in dB
        workers: Thread count; row order does not depend on it

    Returns:
        Points in (snr, e_th) lexicographic order
    """
    thresholds = _check_grid("e_th", e_th_grid)
    snrs = _check_grid("snr_db", snr_db_grid)
    _require_multiuser(cfg)

    coordinates = [(snr, e_th) for snr in snrs for e_th in thresholds]

    def evaluate(coordinate):
        snr, e_th = coordinate
        return tradeoff_point(e_th, cfg.with_snr_db(snr), snr_db=snr)

    points = _run_ordered(evaluate, coordinates, workers)
    logger.info(
        "tradeoff_sweep_done",
        n=cfg.n,
        points=len(points),
        silent_conv=sum(p.silent_conv for p in points),
    )
    return points


def tradeoff_surface(
    cfg: SystemConfig,
    n_grid: Sequence[int],
    e_th_grid: Sequence[float],
    snr_db_grid: Sequence[float],
    workers: int = 1,
) -> List[TradeoffPoint]:
    """Blocklength-resolved sweep; points in (n, snr, e_th) order."""
    blocklengths = _check_grid("n", n_grid)
    points: List[TradeoffPoint] = []
    for n in blocklengths:
        points.extend(tradeoff_sweep(cfg.with_n(int(n)), e_th_grid, snr_db_grid, workers))
    return points


def first_non_silent_threshold(points: Sequence[TradeoffPoint], bound: str = "conv") -> float:
    """
    Smallest e_th whose rate is positive among the given points.

    Returns math.inf when every point is silent.

    Raises:
        InvalidSpecError: if bound is not "achi" or "conv"
    """
    if bound not in ("achi", "conv"):
        raise InvalidSpecError(f"bound must be 'achi' or 'conv', got '{bound}'")
    attribute = f"silent_{bound}"
    active = [p.e_th for p in points if not getattr(p, attribute)]
    return min(active) if active else math.inf


# =============================================================================
# ERGODIC CAPACITY (MONTE CARLO CHECK OF THE CEILING)
# =============================================================================

def ergodic_capacity_per_user(cfg: SystemConfig, trials: int, seed: int) -> float:
    """
    Monte Carlo E[log2 det(I_m + SNR H H^H)] / k for i.i.d. CN(0, sigma_H2) H.

    By Jensen's inequality the result never exceeds shannon_per_user(cfg).
    """
    if trials < 1:
        raise InvalidSpecError(f"trials must be ≥ 1, got {trials}")
    snr = cfg.snr_linear
    capacities = np.empty(trials)
    for trial in range(trials):
        rng = spawn_generator(seed, CAPACITY_STREAM, trial)
        H = complex_gaussian(rng, (cfg.m, cfg.k), cfg.sigma_H2)
        _, logdet = np.linalg.slogdet(np.eye(cfg.m) + snr * (H @ H.conj().T))
        capacities[trial] = logdet / math.log(2.0)
    return float(capacities.mean() / cfg.k)


# End of Communication-Sensing Tradeoff Bounds
