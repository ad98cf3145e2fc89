"""Deterministic CSV output: shortest round-trip floats, LF endings, UTF-8."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np


def format_value(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def write_csv(path, header, columns, meta: dict | None = None) -> Path:
    """Write equal-length ``columns`` under ``header``.

    ``meta`` becomes a single leading ``# key=value, ...`` line.
    """
    path = Path(path)
    columns = [list(c) if not isinstance(c, np.ndarray) else c.tolist() for c in columns]
    n = len(columns[0]) if columns else 0
    if any(len(c) != n for c in columns):
        raise ValueError("columns must have equal length")
    lines = []
    if meta:
        lines.append("# " + ", ".join(f"{k}={format_value(v)}" for k, v in meta.items()))
    lines.append(",".join(header))
    for i in range(n):
        lines.append(",".join(format_value(c[i]) for c in columns))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_rows(path, header, rows, meta: dict | None = None) -> Path:
    cols = [list(col) for col in zip(*rows)] if rows else [[] for _ in header]
    return write_csv(path, header, cols, meta)


def read_csv(path) -> tuple[dict, list[str], list[list[str]]]:
    meta, header, rows = {}, None, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                for item in line[1:].split(","):
                    if "=" in item:
                        k, v = item.split("=", 1)
                        meta[k.strip()] = v.strip()
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append(line.split(","))
    return meta, header, rows
