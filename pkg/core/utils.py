"""
Utility functions for sphere-moments.

Provides number formatting, CSV export, config hashing, and logging setup.
"""

import csv
import hashlib
import io
import json
import logging
import sys
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from core.rules import APP_LOG_FILE


def setup_logging(log_file: Optional[Path] = None, verbose: bool = False) -> logging.Logger:
    """
    Set up logging to file and console.
    Logs are stored in ~/.sphere_moments/logs/run.log; the file handler is
    skipped when that location is not writable.
    """
    log_file = log_file or APP_LOG_FILE

    logger = logging.getLogger("sphere_moments")
    logger.setLevel(logging.DEBUG)

    if not logger.handlers:
        try:
            log_file.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_file, encoding="utf-8")
            file_handler.setLevel(logging.DEBUG)
            file_fmt = logging.Formatter(
                "%(asctime)s [%(levelname)s] %(name)s: %(message)s",
                datefmt="%Y-%m-%d %H:%M:%S",
            )
            file_handler.setFormatter(file_fmt)
            logger.addHandler(file_handler)
        except OSError:
            pass

        # CSV goes to stdout, so diagnostics stay on stderr
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(logging.DEBUG if verbose else logging.INFO)
        console_fmt = logging.Formatter("[%(levelname)s] %(message)s")
        console_handler.setFormatter(console_fmt)
        logger.addHandler(console_handler)

    return logger


def format_float(value: float) -> str:
    """17 significant digits: enough to round-trip any double."""
    return f"{float(value):.17g}"


def config_hash(config: Dict[str, object]) -> str:
    """sha256 of the canonical JSON form (sorted keys, no whitespace)."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, str)):
        return str(value)
    return format_float(value)


def export_to_csv(
    header: Sequence[str],
    rows: Iterable[Sequence],
    output_path: Optional[Path] = None,
    footer: Union[None, Dict[str, object], List[Dict[str, object]]] = None,
) -> None:
    """
    Write result rows as CSV to a file, or to stdout when no path is given.

    Floats are written with 17 significant digits. The optional footer is
    appended as `# {json}` comment lines, one per dict. Nothing time-dependent is
    written, so identical inputs give byte-identical files.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([_format_cell(v) for v in row])
    for entry in ([footer] if isinstance(footer, dict) else footer or []):
        buffer.write("# " + json.dumps(entry, sort_keys=True, default=str) + "\n")

    text = buffer.getvalue()
    if output_path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w", newline="", encoding="utf-8") as f:
        f.write(text)
