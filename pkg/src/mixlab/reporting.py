"""Deterministic report writers: JSON documents and CSV tables.

Reports must be byte-identical across reruns with the same seed, so keys are
sorted, floats go through repr, and anything time- or host-dependent belongs
in the separate run_meta.json written next to the reports.
"""

from __future__ import annotations

import csv
import datetime
import json
import platform
from pathlib import Path

import numpy as np

__all__ = ["to_jsonable", "write_json", "write_csv", "write_run_metadata"]


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and dataclass-likes."""
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    return obj


def write_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=True)
                    + "\n")
    return path


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(x) if isinstance(x, float) else x
                             for x in to_jsonable(list(row))])
    return path


def write_run_metadata(out_dir, extra=None) -> Path:
    """Timestamps and environment info, segregated from the reports."""
    meta = {
        "timestamp_utc": datetime.datetime.now(
            datetime.timezone.utc).isoformat(),
        "platform": platform.platform(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    if extra:
        meta.update(extra)
    out = Path(out_dir) / "run_meta.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return out
