"""
isac-fbl - Command Line Interface

Usage:
    isac-fbl tradeoff   --config config/tradeoff_snr.yml [--output out.csv]
    isac-fbl surface    --config config/tradeoff_surface.yml
    isac-fbl montecarlo --config config/montecarlo_verify.yml --seed 42 --threads 4
    isac-fbl crb        --config config/crb_sweep.yml

Environment (.env is honoured):
    ISAC_FBL_THREADS    default --threads (1)
    ISAC_FBL_LOG_LEVEL  DEBUG | INFO | WARNING | ERROR (INFO)
    ISAC_FBL_LOG_JSON   1 renders logs as JSON lines

Exit codes: 0 success, 1 bad arguments or config/validation error, 2 numerical failure,
3 output failure. Logs go to stderr; CSV goes to the output file or stdout.
"""

import argparse
import os
import sys
from typing import List, Optional

import structlog
from dotenv import load_dotenv

from src import __version__
from src.core.errors import ConfigError, InvalidSpecError, NumericalError, OutputError
from src.core.logging_setup import configure_logging
from src.runner.config import load_config
from src.runner.experiments import run_experiment

logger = structlog.get_logger()

SUBCOMMANDS = {
    "tradeoff": "tradeoff_snr",
    "surface": "tradeoff_surface",
    "montecarlo": "montecarlo_verify",
    "crb": "crb_sweep",
}

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_OUTPUT = 3


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value <= 2**64 - 1:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isac-fbl",
        description="Finite-blocklength ISAC tradeoff bounds, LS sensing checks and CRB sweeps.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    helps = {
        "tradeoff": "rate bounds over SNR and sensing threshold",
        "surface": "rate bounds over blocklength, SNR and sensing threshold",
        "montecarlo": "Monte Carlo check of the LS NMSE decomposition",
        "crb": "CRB sweeps for AoA, range and velocity",
    }
    for name, help_text in helps.items():
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", required=True, help="YAML run configuration")
        sub.add_argument("--output", default=None, help="CSV path ('-' for stdout); overrides output_path")
        sub.add_argument("--seed", type=_u64, default=None, help="64-bit unsigned seed; overrides seed")
        sub.add_argument("--threads", type=_positive_int, default=None, help="worker threads")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    load_dotenv()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # bad arguments map to the config exit code, not argparse's 2
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG

    configure_logging(
        level=os.getenv("ISAC_FBL_LOG_LEVEL", "INFO"),
        json_logs=os.getenv("ISAC_FBL_LOG_JSON", "0") == "1",
    )

    try:
        threads = args.threads or int(os.getenv("ISAC_FBL_THREADS", "1"))
        if threads < 1:
            raise ValueError
    except ValueError:
        logger.error("invalid_thread_count", value=os.getenv("ISAC_FBL_THREADS"))
        return EXIT_CONFIG

    try:
        cfg = load_config(args.config, experiment=SUBCOMMANDS[args.command])
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.output is not None:
            overrides["output_path"] = args.output
        if overrides:
            cfg = cfg.model_copy(update=overrides)

        output = run_experiment(cfg, threads=threads)
    except (ConfigError, InvalidSpecError) as exc:
        logger.error("config_error", error=str(exc))
        return EXIT_CONFIG
    except NumericalError as exc:
        logger.error("numerical_failure", error=str(exc), kind=type(exc).__name__)
        return EXIT_NUMERICAL
    except OutputError as exc:
        logger.error("output_failure", error=str(exc))
        return EXIT_OUTPUT

    logger.info(
        "run_complete",
        experiment=output.experiment,
        rows=len(output.rows),
        output=str(output.path) if output.path else "stdout",
    )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
