"""Delimited/JSON artifact writers shared by the CLI commands.

All CSV output uses a '.' decimal separator, LF line endings, and a header
row. Result files carry no timestamps; the run manifest is the only
artifact allowed to differ between identical runs.
"""

from __future__ import annotations

import csv
import json
from datetime import datetime, timezone
from pathlib import Path

from . import __version__


def format_value(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def write_csv(path, header, rows) -> None:
    """Write rows of mixed int/float/str cells under a header row."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def write_text(path, text: str) -> None:
    Path(path).write_text(text)


def write_manifest(out_dir, command: str, inputs: dict, config: dict) -> Path:
    """Record what produced this artifact directory (one manifest per dir)."""
    payload = {
        "command": command,
        "inputs": inputs,
        "config": config,
        "tool": "bandmi",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path
