"""Deterministic result tables: CSV with a # metadata header, JSON mirror.

Files are written to a temporary sibling and atomically renamed, so a
crashed run never leaves a truncated table behind.  Nothing time- or
host-dependent goes into the metadata: identical inputs must give
byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path

from . import __version__


def _fmt(val) -> object:
    if val is None:
        return ""
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, float):
        return format(val, ".17g")
    if isinstance(val, complex):
        return f"{format(val.real, '.17g')}{val.imag:+.17g}j"
    return val


def write_table(
    path: str | Path,
    name: str,
    columns: list[str],
    rows: list[list],
    meta: dict,
    fmt: str = "csv",
) -> Path:
    """Write one table; fmt selects csv (default) or a json mirror."""
    path = Path(path)
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(f"# fiberqed {__version__}\n")
        buf.write(f"# table: {name}\n")
        for key in sorted(meta):
            buf.write(f"# {key} = {_fmt(meta[key])}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        payload = buf.getvalue()
    elif fmt == "json":
        def enc(v):
            if isinstance(v, complex):
                return [v.real, v.imag]
            if isinstance(v, float) and v != v:
                return None
            return v

        doc = {
            "version": __version__,
            "table": name,
            "meta": {k: enc(meta[k]) for k in sorted(meta)},
            "columns": columns,
            "rows": [[enc(v) for v in row] for row in rows],
        }
        payload = json.dumps(doc, indent=1, sort_keys=False) + "\n"
    else:
        raise ValueError(f"unknown table format '{fmt}'")
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(payload)
    os.replace(tmp, path)
    return path


def read_table(path: str | Path) -> tuple[dict, list[str], list[list[str]]]:
    """Read back a CSV table: (meta, columns, string rows)."""
    meta: dict = {}
    lines = Path(path).read_text().splitlines()
    body_start = 0
    for i, line in enumerate(lines):
        if not line.startswith("#"):
            body_start = i
            break
        stripped = line[1:].strip()
        if "=" in stripped:
            key, val = (p.strip() for p in stripped.split("=", 1))
            meta[key] = val
        elif stripped.startswith("table:"):
            meta["table"] = stripped.split(":", 1)[1].strip()
    reader = csv.reader(lines[body_start:])
    rows = [row for row in reader if row]
    return meta, rows[0], rows[1:]
