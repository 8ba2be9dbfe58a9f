"""Locate and parse the periodic-profile CSVs a sweep directory contains.

The sweep layout is fixed: ``<mode dir>/<target percent>/<profile file>``,
where every profile file carries the header ``bin,median,p10,p25,p75,p90``.
"""

from __future__ import annotations

import csv
from pathlib import Path

PROFILE_HEADER = ["bin", "median", "p10", "p25", "p75", "p90"]


class MissingInput(Exception):
    """A referenced sweep directory or profile file is not on disk."""


def _target_key(name: str):
    return (0, int(name)) if name.isdigit() else (1, name)


def discover_targets(mode_dir: str | Path,
                     profile_name: str) -> list[tuple[str, Path]]:
    """Target subdirectories holding the requested profile, in target order."""
    root = Path(mode_dir)
    if not root.is_dir():
        raise MissingInput(f"sweep directory {root} does not exist")
    found = [(child.name, child / profile_name)
             for child in sorted(root.iterdir(), key=lambda p: _target_key(p.name))
             if child.is_dir() and (child / profile_name).is_file()]
    if not found:
        raise MissingInput(f"no <target>/{profile_name} files under {root}")
    return found


def read_profile(path: str | Path) -> dict[str, list[float]]:
    """Parse one profile CSV into per-column float lists."""
    path = Path(path)
    if not path.is_file():
        raise MissingInput(f"profile file {path} does not exist")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != PROFILE_HEADER:
            raise ValueError(f"{path}: expected header {PROFILE_HEADER}, "
                             f"got {header}")
        rows = [row for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    if any(len(row) != len(PROFILE_HEADER) for row in rows):
        raise ValueError(f"{path}: ragged rows")
    columns = list(zip(*rows))
    return {name: [float(v) for v in col]
            for name, col in zip(PROFILE_HEADER, columns)}
