"""Readers for the experiment file formats.

These scripts couple to the documented CSV/dump layouts only, never to the
engine package, so they can post-process any run directory as-is.
"""

from __future__ import annotations

import csv
import glob as globlib
from pathlib import Path

import numpy as np

METRICS_COLUMNS = (
    "iteration",
    "coverage_pct",
    "grid_mean_fitness",
    "container_size",
    "d_min",
    "cumulative_loss",
    "updates",
)


def read_metrics(path) -> dict[str, np.ndarray]:
    """Metrics CSV -> column arrays; empty fields load as NaN."""
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != METRICS_COLUMNS:
            raise ValueError(f"{path}: not a metrics CSV (header {header})")
        rows = [row for row in reader if row]
    cols: dict[str, np.ndarray] = {}
    for j, name in enumerate(METRICS_COLUMNS):
        values = [float(r[j]) if r[j] != "" else np.nan for r in rows]
        cols[name] = np.array(values)
    return cols


def read_dump(path) -> tuple[np.ndarray, np.ndarray]:
    """Container dump -> (hand-coded BDs (n, 2), fitness (n,))."""
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        required = ["replication", "iteration", "fitness", "bd_0", "bd_1"]
        if header is None or header[:5] != required:
            raise ValueError(f"{path}: not a container dump (header {header})")
        bds = []
        fits = []
        for row in reader:
            if not row:
                continue
            fits.append(float(row[2]))
            bds.append((float(row[3]), float(row[4])))
    if not bds:
        return np.empty((0, 2)), np.empty(0)
    return np.array(bds), np.array(fits)


def expand_inputs(patterns: list[str]) -> list[Path]:
    """Glob-expand input patterns (absolute or relative), sorted."""
    paths: list[Path] = []
    for pattern in patterns:
        p = Path(pattern)
        if p.exists():
            paths.append(p)
            continue
        paths.extend(Path(m) for m in sorted(globlib.glob(pattern)))
    return paths
