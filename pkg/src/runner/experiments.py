"""
isac-fbl - Experiment Runner
Turns a RunConfig into CSV rows by calling the library operations directly.

Experiments:
- tradeoff_snr       rate bounds over (snr, e_th) at one blocklength
- tradeoff_surface   the same over (n, snr, e_th)
- montecarlo_verify  simulated vs analytic LS NMSE per (n, k, m, snr) tuple
- crb_sweep          CRB per parameter over its variation and SNR

Rows are produced in declared key order whatever the thread count; only the
point evaluation runs concurrently.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import structlog

from src.bounds.codebook import CodebookSpec, orthogonal_codewords, sample_active_codewords
from src.bounds.gram_geometry import gram_matrix
from src.bounds.tradeoff_bounds import tradeoff_surface, tradeoff_sweep
from src.core.errors import InvalidSpecError, NumericalError
from src.core.seeding import derive_seed
from src.runner.config import RunConfig, dump_config
from src.runner.csv_output import SCHEMAS, write_csv
from src.sensing.channel_3gpp import build_jacobian, default_user_states
from src.sensing.crb import crb_trace, select_parameters
from src.sensing.ls_sensing import monte_carlo_nmse

logger = structlog.get_logger()

# Radio field each CRB parameter is swept over
CRB_VARIATIONS: Dict[str, str] = {"aoa": "m", "range": "fc", "velocity": "n"}

USER_PLACEMENT = (
    "theta evenly spaced in (-60, 60) deg; r evenly spaced in [20, 200] m; "
    "v evenly spaced in [-30, 30] m/s"
)


@dataclass
class ExperimentOutput:
    """Rows of one experiment plus what was written."""
    experiment: str
    columns: List[str]
    rows: List[Dict[str, object]]
    metadata: Dict[str, str] = field(default_factory=dict)
    path: Optional[Path] = None


def _metadata(cfg: RunConfig, **extra: str) -> Dict[str, str]:
    # output_path is left out so the bytes do not depend on where they are written
    echo = dump_config(cfg.model_copy(update={"output_path": None}))
    return {"experiment": cfg.experiment, **extra, "config": echo}


def _emit(cfg: RunConfig, rows: List[Dict[str, object]], metadata: Dict[str, str]) -> ExperimentOutput:
    columns = SCHEMAS[cfg.experiment]
    path = write_csv(cfg.output_path, columns, rows, metadata)
    return ExperimentOutput(cfg.experiment, columns, rows, metadata, path)


def _ordered_map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


# =============================================================================
# TRADEOFF
# =============================================================================

def run_tradeoff(cfg: RunConfig, threads: int = 1) -> ExperimentOutput:
    """
    Achievability/converse sweep (tradeoff_snr or tradeoff_surface).

    No randomness is involved: identical configs give identical bytes.
    """
    if cfg.experiment not in ("tradeoff_snr", "tradeoff_surface"):
        raise InvalidSpecError(f"run_tradeoff cannot run experiment '{cfg.experiment}'")

    if cfg.experiment == "tradeoff_surface":
        points = tradeoff_surface(cfg.system, cfg.n_grid(), cfg.grids.e_th, cfg.grids.snr_db, threads)
    else:
        points = tradeoff_sweep(cfg.system, cfg.grids.e_th, cfg.grids.snr_db, threads)

    rows = [p.to_dict() for p in points]
    logger.info("tradeoff_experiment_done", experiment=cfg.experiment, rows=len(rows))
    return _emit(cfg, rows, _metadata(cfg))


# =============================================================================
# MONTE CARLO
# =============================================================================

def run_montecarlo(cfg: RunConfig, threads: int = 1) -> ExperimentOutput:
    """
    Monte Carlo check of NMSE = e_min · G_eta for every (n, k, m, snr) tuple.

    Tuple i draws its codewords and trials from derive_seed(seed, i), so a row
    depends only on the seed and its position in the grid.

    Raises:
        RankDeficientError: with the offending tuple attached
    """
    if cfg.experiment != "montecarlo_verify":
        raise InvalidSpecError(f"run_montecarlo cannot run experiment '{cfg.experiment}'")

    tuples = list(product(cfg.n_grid(), cfg.k_grid(), cfg.m_grid(), cfg.snr_grid()))
    rows: List[Dict[str, object]] = []
    for index, (n, k, m, snr_db) in enumerate(tuples):
        system = cfg.system.model_copy(update={"n": n, "k": k, "m": m}).with_snr_db(snr_db)
        tuple_seed = derive_seed(cfg.seed, index)
        try:
            X = sample_active_codewords(CodebookSpec(n=n, k=k, p_bar=system.p_bar, seed=tuple_seed))
            breakdown = monte_carlo_nmse(system, X, cfg.trials, tuple_seed, workers=threads)
        except NumericalError as exc:
            logger.error("montecarlo_tuple_failed", n=n, k=k, m=m, snr_db=snr_db, error=str(exc))
            raise exc.with_context(n=n, k=k, m=m, snr_db=snr_db)

        rows.append({
            "n": n,
            "k": k,
            "m": m,
            "snr_db": float(snr_db),
            "trials": cfg.trials,
            "nmse_analytic": breakdown.nmse_analytic,
            "nmse_empirical": breakdown.nmse_empirical,
            "rel_err": breakdown.relative_error,
        })

    logger.info("montecarlo_experiment_done", tuples=len(rows), trials=cfg.trials)
    return _emit(cfg, rows, _metadata(cfg))


# =============================================================================
# CRB SWEEP
# =============================================================================

def _unit_power_gram(cfg: RunConfig, n: int) -> np.ndarray:
    """Gram matrix at p_bar = 1 for blocklength n; scaled by p_bar per SNR."""
    k = cfg.system.k
    if cfg.crb.codebook == "orthogonal":
        X = orthogonal_codewords(n, k, 1.0)
    else:
        X = sample_active_codewords(CodebookSpec(n=n, k=k, p_bar=1.0, seed=derive_seed(cfg.seed, n)))
    return gram_matrix(X)


def run_crb_sweep(cfg: RunConfig, threads: int = 1) -> ExperimentOutput:
    """
    CRB of each selected parameter over its variation and the SNR grid.

    aoa varies the antenna count m, range the carrier fc and velocity the
    blocklength n; every other radio field keeps its configured value. Users
    sit at default_user_states(k). The codebook of blocklength n is drawn once
    and shared by all rows using that n.

    Raises:
        SingularFIMError: with the parameter and variation attached
    """
    if cfg.experiment != "crb_sweep":
        raise InvalidSpecError(f"run_crb_sweep cannot run experiment '{cfg.experiment}'")

    states = default_user_states(cfg.system.k)
    sigma_n2 = cfg.system.sigma_n2

    blocklengths = sorted({cfg.radio.n} | set(cfg.variations.n))
    grams = {n: _unit_power_gram(cfg, n) for n in blocklengths}

    coordinates = []
    for parameter in cfg.crb.parameters:
        name = CRB_VARIATIONS[parameter]
        for value in sorted(getattr(cfg.variations, name)):
            for snr_db in cfg.grids.snr_db:
                coordinates.append((parameter, name, value, snr_db))

    def evaluate(coordinate) -> Dict[str, object]:
        parameter, name, value, snr_db = coordinate
        radio = cfg.radio.model_copy(update={name: value})
        p_bar = sigma_n2 * 10.0 ** (snr_db / 10.0)
        J = select_parameters(build_jacobian(states, radio), [parameter])
        try:
            result = crb_trace(J, p_bar * grams[radio.n], sigma_n2)
        except NumericalError as exc:
            logger.error("crb_point_failed", parameter=parameter, variation=name, value=value, snr_db=snr_db)
            raise exc.with_context(parameter=parameter, variation_name=name, variation_value=value)
        return {
            "parameter": parameter,
            "variation_name": name,
            "variation_value": value,
            "snr_db": float(snr_db),
            "crb_value": result.crb_trace,
        }

    rows = _ordered_map(evaluate, coordinates, threads)
    logger.info("crb_experiment_done", rows=len(rows), codebook=cfg.crb.codebook)
    metadata = _metadata(cfg, user_placement=USER_PLACEMENT, codebook=cfg.crb.codebook)
    return _emit(cfg, rows, metadata)


# =============================================================================
# DISPATCH
# =============================================================================

RUNNERS: Dict[str, Callable[[RunConfig, int], ExperimentOutput]] = {
    "tradeoff_snr": run_tradeoff,
    "tradeoff_surface": run_tradeoff,
    "montecarlo_verify": run_montecarlo,
    "crb_sweep": run_crb_sweep,
}


def run_experiment(cfg: RunConfig, threads: int = 1) -> ExperimentOutput:
    """Run whatever cfg.experiment names."""
    if threads < 1:
        raise InvalidSpecError(f"threads must be ≥ 1, got {threads}")
    logger.info("experiment_started", experiment=cfg.experiment, seed=cfg.seed, threads=threads)
    return RUNNERS[cfg.experiment](cfg, threads)


# End of Experiment Runner
