"""Figure builders: metric progression with median and interquartile band,
descriptor scatter coloured by fitness, and final-value summaries across
latent dimensionalities."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from matplotlib import pyplot as plt

from .io import expand_inputs, read_dump, read_metrics

log = logging.getLogger(__name__)

TASK_BOUNDS = {
    "maze": ((0.0, 600.0), (0.0, 600.0)),
    "airhockey": ((-1.0, 1.0), (-1.0, 1.0)),
}


@dataclass
class FigureSpec:
    kind: str  # progression | scatter | dimsweep
    inputs: dict[str, list[str]]  # label -> CSV/dump globs
    output: str
    metric: str = "coverage_pct"
    task: str | None = None
    options: dict = field(default_factory=dict)


def median_iqr(per_replication: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Median and quartiles across replications (rows) per iteration (cols)."""
    med = np.median(per_replication, axis=0)
    q1 = np.percentile(per_replication, 25, axis=0)
    q3 = np.percentile(per_replication, 75, axis=0)
    return med, q1, q3


def plot_progression(
    inputs: dict[str, list[str]], metric: str, output
) -> dict[str, dict[str, np.ndarray]]:
    """One curve per labelled variant: median across replications with the
    interquartile range shaded. All CSVs must share the iteration grid.

    Returns the plotted series per label (iterations, median, q1, q3).
    """
    series: dict[str, dict[str, np.ndarray]] = {}
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, patterns in inputs.items():
        paths = expand_inputs(patterns)
        if not paths:
            raise ValueError(f"{label}: no metrics CSVs match {patterns}")
        runs = [read_metrics(p) for p in paths]
        grid = runs[0]["iteration"]
        for path, cols in zip(paths, runs):
            if not np.array_equal(cols["iteration"], grid):
                raise ValueError(
                    f"iteration grids differ: {paths[0]} vs {path}"
                )
        stacked = np.vstack([cols[metric] for cols in runs])
        med, q1, q3 = median_iqr(stacked)
        (line,) = ax.plot(grid, med, label=label)
        ax.fill_between(grid, q1, q3, alpha=0.25, color=line.get_color())
        series[label] = {"iterations": grid, "median": med, "q1": q1, "q3": q3}
    ax.set_xlabel("iteration")
    ax.set_ylabel(metric.replace("_", " "))
    ax.legend()
    fig.tight_layout()
    fig.savefig(output)
    plt.close(fig)
    return series


def plot_bd_scatter(dump_path, task: str, output) -> int:
    """Hand-coded descriptors coloured by fitness; returns the marker count."""
    if task not in TASK_BOUNDS:
        raise ValueError(f"unknown task {task!r}")
    bds, fits = read_dump(dump_path)
    fig, ax = plt.subplots(figsize=(5, 4.5))
    if bds.shape[0] == 0:
        log.warning("%s: empty dump, producing empty axes", dump_path)
    else:
        sc = ax.scatter(bds[:, 0], bds[:, 1], c=fits, s=8, cmap="viridis")
        fig.colorbar(sc, ax=ax, label="fitness")
    (x_lo, x_hi), (y_lo, y_hi) = TASK_BOUNDS[task]
    ax.set_xlim(x_lo, x_hi)
    ax.set_ylim(y_lo, y_hi)
    ax.set_xlabel("bd[0]")
    ax.set_ylabel("bd[1]")
    fig.tight_layout()
    fig.savefig(output)
    plt.close(fig)
    return int(bds.shape[0])


def plot_dim_sweep(
    groups: dict[tuple[str, int], list[str]], metric: str, output
) -> dict[tuple[str, int], float]:
    """Final-row summaries grouped by (threshold mode, latent dim).

    Bar height is the median over each group's final CSV rows; groups whose
    globs match nothing are skipped with a warning. Raises when no group has
    data at all.
    """
    summaries: dict[tuple[str, int], float] = {}
    for key, patterns in sorted(groups.items()):
        paths = expand_inputs(patterns)
        if not paths:
            log.warning("group %s: no inputs matched, skipping", key)
            continue
        finals = [read_metrics(p)[metric][-1] for p in paths]
        summaries[key] = float(np.median(finals))
    if not summaries:
        raise ValueError("no dimsweep group matched any input")
    modes = sorted({mode for mode, _ in summaries})
    dims = sorted({dim for _, dim in summaries})
    width = 0.8 / len(modes)
    fig, ax = plt.subplots(figsize=(6.5, 4))
    for mi, mode in enumerate(modes):
        xs, ys = [], []
        for di, dim in enumerate(dims):
            if (mode, dim) in summaries:
                xs.append(di + mi * width)
                ys.append(summaries[(mode, dim)])
        ax.bar(xs, ys, width=width, label=mode)
    ax.set_xticks([d + 0.4 - width / 2 for d in range(len(dims))])
    ax.set_xticklabels([str(d) for d in dims])
    ax.set_xlabel("latent dimensionality")
    ax.set_ylabel(f"final {metric.replace('_', ' ')}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(output)
    plt.close(fig)
    return summaries
