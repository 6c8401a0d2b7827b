"""Output helpers: logging setup, run directories, CSV and manifest files."""
from __future__ import annotations

import csv
import logging
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import yaml

from .config import get_settings
from .models import RunManifest

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s - %(message)s"


def configure_logging(log_path: Path, level: str = "INFO") -> None:
    log_path.parent.mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format=LOG_FORMAT,
        handlers=[
            logging.FileHandler(log_path, encoding="utf-8"),
            logging.StreamHandler(),
        ],
        force=True,
    )


def ensure_output_dir(output_dir: Optional[str], command: str) -> Path:
    if output_dir:
        path = Path(output_dir)
    else:
        timestamp = datetime.now(timezone.utc).strftime("%Y%m%d-%H%M%S")
        path = get_settings().output_root() / f"{command}-{timestamp}"
    path.mkdir(parents=True, exist_ok=True)
    return path


def fmt(value: object) -> str:
    """17 significant digits for floats, so every double round-trips."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def complex_columns(prefix: str, value: complex) -> Dict[str, float]:
    value = complex(value)
    return {f"re_{prefix}": value.real, f"im_{prefix}": value.imag}


def write_csv(rows: Iterable[Dict[str, object]], path: Path, fieldnames: Optional[Sequence[str]] = None) -> Path:
    records: List[Dict[str, object]] = list(rows)
    if fieldnames is None:
        fieldnames = list(records[0].keys()) if records else []
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=list(fieldnames), lineterminator="\n")
        writer.writeheader()
        for record in records:
            writer.writerow({key: fmt(record.get(key, "")) for key in fieldnames})
    return path


def _plain(value: object) -> object:
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def write_manifest(manifest: RunManifest, path: Path) -> Path:
    with path.open("w", encoding="utf-8") as f:
        yaml.safe_dump(_plain(asdict(manifest)), f, sort_keys=False, allow_unicode=True)
    return path
