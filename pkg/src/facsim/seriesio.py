"""Deterministic on-disk formats for run artifacts.

Every writer here is byte-stable: fixed column order, fixed float formatting
(six decimals), sorted JSON keys, LF line endings, and no wall-clock values.
Two runs with the same inputs and seed produce identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import EmptySeries, MalformedTrace

FLOAT_FORMAT = "{:.6f}"


def _fmt(x: float) -> str:
    return FLOAT_FORMAT.format(float(x))


def write_timeseries_csv(path: str | Path, timestamps: list[str],
                         columns: dict[str, np.ndarray]) -> None:
    """Write `timestamp,<columns...>` with all values as 6-decimal reals.

    Count columns are written as reals too, so readers can parse every value
    column uniformly.
    """
    n = len(timestamps)
    for name, col in columns.items():
        if len(col) != n:
            raise ValueError(f"column {name!r} length {len(col)} != {n} timestamps")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["timestamp", *columns.keys()])
        cols = [np.asarray(c, dtype=np.float64) for c in columns.values()]
        for i in range(n):
            writer.writerow([timestamps[i], *(_fmt(c[i]) for c in cols)])


def read_timeseries_csv(path: str | Path) -> tuple[list[str], dict[str, np.ndarray]]:
    """Inverse of write_timeseries_csv: timestamps plus float columns."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptySeries(f"{path}: empty file") from None
        if not header or header[0] != "timestamp":
            raise MalformedTrace(f"{path}: expected a 'timestamp' first column")
        names = header[1:]
        timestamps: list[str] = []
        values: list[list[float]] = [[] for _ in names]
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise MalformedTrace(f"{path}:{lineno}: expected {len(header)} fields")
            timestamps.append(row[0])
            for k, cell in enumerate(row[1:]):
                try:
                    values[k].append(float(cell))
                except ValueError:
                    raise MalformedTrace(f"{path}:{lineno}: bad value {cell!r}") from None
    if not timestamps:
        raise EmptySeries(f"{path}: no data rows")
    return timestamps, {name: np.asarray(vals) for name, vals in zip(names, values)}


def write_periodic_csv(path: str | Path, profile) -> None:
    """Write a folded daily/weekly profile: bin,median,p10,p25,p75,p90."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bin", "median", "p10", "p25", "p75", "p90"])
        for b, med, p10, p25, p75, p90 in profile.rows():
            writer.writerow([b, _fmt(med), _fmt(p10), _fmt(p25), _fmt(p75), _fmt(p90)])


def read_periodic_csv(path: str | Path) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        expected = ["bin", "median", "p10", "p25", "p75", "p90"]
        if header != expected:
            raise MalformedTrace(f"{path}: expected header {expected}, got {header}")
        rows = [row for row in reader if row]
    if not rows:
        raise EmptySeries(f"{path}: no data rows")
    data = np.asarray(rows, dtype=np.float64)
    return {name: data[:, k] for k, name in enumerate(expected)}


def write_json(path: str | Path, payload: dict) -> None:
    """Sorted-key JSON with a trailing newline; floats pass through repr."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
