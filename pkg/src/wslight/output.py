"""Table writers: CSV with a config-hash comment line, or JSON."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


def _fmt(v):
    if isinstance(v, (str, bytes)):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_table(path, columns: dict, digest: str, fmt: str = "csv") -> Path:
    """Write equal-length ``columns`` to ``path`` (suffix set from ``fmt``)."""
    path = Path(path).with_suffix("." + fmt)
    names = list(columns)
    cols = [list(np.asarray(columns[n]).tolist()) if not isinstance(columns[n], list) else columns[n]
            for n in names]
    lengths = {len(c) for c in cols}
    if len(lengths) > 1:
        raise ValueError(f"ragged columns for {path.name}: {lengths}")
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        payload = {"config_sha256": digest, "columns": dict(zip(names, cols))}
        path.write_text(json.dumps(payload, indent=1))
        return path
    with path.open("w", newline="") as fh:
        fh.write(f"# config_sha256={digest}\n")
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_fmt(v) for v in row])
    return path


def read_table(path):
    """Read a CSV written by ``write_table`` into (digest, {name: array})."""
    path = Path(path)
    with path.open() as fh:
        first = fh.readline().strip()
        digest = first.split("=", 1)[1] if first.startswith("# config_sha256=") else None
        rows = list(csv.reader(fh))
    names, body = rows[0], rows[1:]
    out = {}
    for i, n in enumerate(names):
        vals = [r[i] for r in body]
        try:
            out[n] = np.array([float(v) for v in vals])
        except ValueError:
            out[n] = np.array(vals)
    return digest, out
