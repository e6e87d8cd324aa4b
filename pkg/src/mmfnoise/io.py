"""Deterministic CSV output with key-value metadata sidecars.

Floats are written with 17 significant digits so that files round-trip
exactly and are byte-identical across runs.
"""
from __future__ import annotations

import csv
import hashlib
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

SCHEMA_VERSION = "1"

__all__ = ["SCHEMA_VERSION", "fmt", "write_csv", "read_csv", "write_meta", "read_meta", "config_hash"]


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def write_meta(path, meta: Mapping[str, object]) -> Path:
    """Write ``key = value`` lines; list values are joined with ``; ``."""
    path = Path(path)
    lines = []
    for k, v in meta.items():
        if isinstance(v, (list, tuple)):
            v = "; ".join(str(x) for x in v) if v else "none"
        lines.append(f"{k} = {v}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_meta(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def write_csv(
    path,
    header: Sequence[str],
    columns: Sequence[Iterable],
    meta: Mapping[str, object] | None = None,
) -> Path:
    """Write equal-length ``columns`` under ``header``; sidecar at ``<path>.meta``."""
    path = Path(path)
    cols = [list(c) for c in columns]
    if len(cols) != len(header):
        raise ValueError("header and columns differ in length")
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError("columns differ in length")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([fmt(v) for v in row])
    m = {"schema_version": SCHEMA_VERSION, "columns": ",".join(header), "rows": n}
    if meta:
        m.update(meta)
    m.setdefault("warnings", [])
    write_meta(path.with_name(path.name + ".meta"), m)
    return path


def read_csv(path) -> dict[str, list[str]]:
    """Columns of a CSV keyed by header name (values left as strings)."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    header, body = rows[0], rows[1:]
    return {h: [r[i] for r in body] for i, h in enumerate(header)}
