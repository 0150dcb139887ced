"""
isac-fbl - CSV Output
Deterministic CSV serialization of experiment rows.

Format:
- UTF-8, comma separated, "\n" line endings
- leading metadata lines prefixed "# " (artifact version, experiment, config echo)
- one header row, then rows in the order they were produced
- floats with 12 significant digits, booleans as true/false

Column layouts per experiment live in SCHEMAS; docs/csv_schema.md maps them to
the plots they feed.
"""

import csv
import io
import sys
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Union

import structlog

from src import __version__
from src.core.errors import InvalidSpecError, OutputError

logger = structlog.get_logger()

TRADEOFF_COLUMNS = [
    "snr_db", "e_th", "e_min", "rho_achi", "rho_conv",
    "rate_achi", "rate_conv", "shannon_rate", "silent_achi", "silent_conv",
]

SCHEMAS: Dict[str, List[str]] = {
    "tradeoff_snr": TRADEOFF_COLUMNS,
    "tradeoff_surface": ["n"] + TRADEOFF_COLUMNS,
    "montecarlo_verify": ["n", "k", "m", "snr_db", "trials", "nmse_analytic", "nmse_empirical", "rel_err"],
    "crb_sweep": ["parameter", "variation_name", "variation_value", "snr_db", "crb_value"],
}


def format_value(value: object) -> str:
    """
    Render one cell.

    Example:
        >>> format_value(1 / 3), format_value(True), format_value(16)
        ('0.333333333333', 'true', '16')
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    if value is None:
        return ""
    return str(value)


def render_csv(
    columns: Sequence[str],
    rows: Sequence[Mapping[str, object]],
    metadata: Optional[Mapping[str, str]] = None,
) -> str:
    """Full CSV text including the metadata preamble."""
    buffer = io.StringIO()
    buffer.write(f"# isac-fbl {__version__}\n")
    for key, value in (metadata or {}).items():
        for line in str(value).splitlines() or [""]:
            buffer.write(f"# {key}: {line}\n")

    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for index, row in enumerate(rows):
        missing = [c for c in columns if c not in row]
        if missing:
            raise InvalidSpecError(f"Row {index} lacks columns {missing}")
        writer.writerow([format_value(row[c]) for c in columns])
    return buffer.getvalue()


def write_csv(
    path: Optional[Union[str, Path]],
    columns: Sequence[str],
    rows: Sequence[Mapping[str, object]],
    metadata: Optional[Mapping[str, str]] = None,
) -> Optional[Path]:
    """
    Write rows to path, or to stdout when path is None or "-".

    Returns:
        The written path (None for stdout)

    Raises:
        OutputError: if the file cannot be written
    """
    text = render_csv(columns, rows, metadata)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        logger.info("csv_written", destination="stdout", rows=len(rows))
        return None

    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        with target.open("w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as exc:
        raise OutputError(f"Cannot write {target}: {exc.strerror}", path=str(target)) from exc

    logger.info("csv_written", destination=str(target), rows=len(rows))
    return target


# End of CSV Output
