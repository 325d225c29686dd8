"""Evaluation metrics over containers, all computed on the hand-coded
descriptor grid, plus the puck-trajectory diversity score.

Grid binning: each axis of the bounded descriptor space splits into `grid`
equal parts; a value exactly on an interior boundary falls into the
higher-index cell, the top edge folds into the last cell, and out-of-bounds
values clamp to the edge cells (logged once per call).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

GRID_CELLS = 40
TRAJECTORY_GRID = 10

CSV_HEADER = "iteration,coverage_pct,grid_mean_fitness,container_size,d_min,cumulative_loss,updates"


@dataclass
class MetricsRecord:
    iteration: int
    coverage_pct: float
    grid_mean_fitness: float | None
    container_size: int
    d_min: float | None
    cumulative_loss: int
    updates: int


def bin_indices(values: np.ndarray, lo: float, hi: float, bins: int) -> np.ndarray:
    """Total, deterministic binning of a value array into [0, bins)."""
    values = np.asarray(values, dtype=np.float64)
    idx = np.floor((values - lo) / (hi - lo) * bins).astype(np.int64)
    out_of_bounds = int(np.sum((values < lo) | (values > hi)))
    if out_of_bounds:
        log.warning("%d descriptor values outside bounds; clamped to edge cells", out_of_bounds)
    return np.clip(idx, 0, bins - 1)


def _grid_cells(individuals, bd_bounds, grid: int) -> np.ndarray:
    bds = np.array([ind.hand_coded_bd for ind in individuals])
    ix = bin_indices(bds[:, 0], bd_bounds[0][0], bd_bounds[0][1], grid)
    iy = bin_indices(bds[:, 1], bd_bounds[1][0], bd_bounds[1][1], grid)
    return ix * grid + iy


def coverage(individuals, bd_bounds, grid: int = GRID_CELLS) -> float:
    """Percentage of grid cells holding at least one individual."""
    individuals = list(individuals)
    if not individuals:
        return 0.0
    occupied = np.unique(_grid_cells(individuals, bd_bounds, grid))
    return 100.0 * occupied.size / (grid * grid)


def grid_mean_fitness(individuals, bd_bounds, grid: int = GRID_CELLS) -> float | None:
    """Mean over occupied cells of each cell's best fitness; None when empty."""
    individuals = list(individuals)
    if not individuals:
        return None
    cells = _grid_cells(individuals, bd_bounds, grid)
    best: dict[int, float] = {}
    for cell, ind in zip(cells, individuals):
        cell = int(cell)
        if cell not in best or ind.fitness > best[cell]:
            best[cell] = ind.fitness
    return float(np.mean(list(best.values())))


def avg_container_loss(container) -> float:
    """Total individuals lost per container update; 0 when never updated."""
    if container.update_count == 0:
        return 0.0
    return container.cumulative_loss / container.update_count


def trajectory_diversity(
    trajectories, grid: int = TRAJECTORY_GRID, bounds=(-1.0, 1.0)
) -> tuple[np.ndarray, float]:
    """Per-cell diversity of puck trajectories grouped by their final cell.

    Each trajectory is a (samples, 2) array. For every cell of the
    final-position grid, the score is the percentage of all grid cells
    crossed by any trajectory ending in that cell. Returns the (grid, grid)
    score array (NaN for cells no trajectory ends in) and the mean over
    non-empty cells.
    """
    lo, hi = bounds
    visited: dict[int, set[int]] = {}
    for traj in trajectories:
        pts = np.asarray(traj, dtype=np.float64).reshape(-1, 2)
        ix = bin_indices(pts[:, 0], lo, hi, grid)
        iy = bin_indices(pts[:, 1], lo, hi, grid)
        cells = ix * grid + iy
        end_cell = int(cells[-1])
        visited.setdefault(end_cell, set()).update(int(c) for c in cells)
    scores = np.full((grid, grid), np.nan)
    for end_cell, cells in visited.items():
        scores[end_cell // grid, end_cell % grid] = 100.0 * len(cells) / (grid * grid)
    mean = float(np.nanmean(scores)) if visited else 0.0
    return scores, mean


# -- CSV serialisation -----------------------------------------------------------


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_metrics_csv(records: list[MetricsRecord], path) -> None:
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in records:
            fh.write(
                ",".join(
                    [
                        str(r.iteration),
                        _format(float(r.coverage_pct)),
                        _format(r.grid_mean_fitness),
                        str(r.container_size),
                        _format(r.d_min),
                        str(r.cumulative_loss),
                        str(r.updates),
                    ]
                )
                + "\n"
            )


def read_metrics_csv(path) -> list[MetricsRecord]:
    records = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected metrics header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 7:
                raise ValueError(f"{path}: line {lineno}: expected 7 fields")
            records.append(
                MetricsRecord(
                    iteration=int(parts[0]),
                    coverage_pct=float(parts[1]),
                    grid_mean_fitness=float(parts[2]) if parts[2] else None,
                    container_size=int(parts[3]),
                    d_min=float(parts[4]) if parts[4] else None,
                    cumulative_loss=int(parts[5]),
                    updates=int(parts[6]),
                )
            )
    return records
