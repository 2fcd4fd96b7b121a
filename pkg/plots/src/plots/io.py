"""Readers for the mlcavity CSV contract.

Files carry ``#``-prefixed ``key = value`` metadata lines, then a header
row, then comma-separated data rows.  Numeric columns are returned as
float arrays; non-numeric columns (labels) as object arrays.
"""

from __future__ import annotations

import glob
import os
from dataclasses import dataclass

import numpy as np


class PlotDataError(ValueError):
    """Input CSV missing, empty, or not matching the expected contract."""


@dataclass
class Table:
    """One parsed CSV: metadata, ordered header and per-column arrays."""

    path: str
    meta: dict[str, str]
    header: list[str]
    columns: dict[str, np.ndarray]

    def col(self, name: str) -> np.ndarray:
        """Column by exact name, or a named-column error."""
        if name not in self.columns:
            raise PlotDataError(
                f"{self.path}: missing column {name!r} "
                f"(found: {', '.join(self.header)})"
            )
        return self.columns[name]

    def cols_with_prefix(self, prefix: str) -> dict[str, np.ndarray]:
        out = {h: self.columns[h] for h in self.header if h.startswith(prefix)}
        if not out:
            raise PlotDataError(
                f"{self.path}: no columns with prefix {prefix!r} "
                f"(found: {', '.join(self.header)})"
            )
        return out


def read_table(path: str) -> Table:
    """Parse one contract CSV into a :class:`Table`."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [line.rstrip("\n") for line in fh]
    except OSError as exc:
        raise PlotDataError(f"cannot read {path}: {exc}") from exc

    meta: dict[str, str] = {}
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        key, _, value = lines[i][1:].partition("=")
        meta[key.strip()] = value.strip()
        i += 1
    if i >= len(lines) or not lines[i].strip():
        raise PlotDataError(f"{path}: empty CSV (no header row)")
    header = lines[i].split(",")
    rows = [line.split(",") for line in lines[i + 1 :] if line.strip()]
    if not rows:
        raise PlotDataError(f"{path}: empty CSV (header but no data rows)")
    if any(len(r) != len(header) for r in rows):
        raise PlotDataError(f"{path}: ragged rows do not match the header")

    columns: dict[str, np.ndarray] = {}
    for j, name in enumerate(header):
        raw = [r[j] for r in rows]
        try:
            columns[name] = np.array([float(v) for v in raw])
        except ValueError:
            columns[name] = np.array(raw, dtype=object)
    return Table(path=path, meta=meta, header=header, columns=columns)


def find_tables(indir: str, pattern: str) -> list[Table]:
    """All contract CSVs in ``indir`` matching ``pattern``, sorted by name."""
    paths = sorted(glob.glob(os.path.join(indir, pattern)))
    if not paths:
        raise PlotDataError(f"no files matching {pattern!r} in {indir}")
    return [read_table(p) for p in paths]
