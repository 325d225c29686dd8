"""Post-hoc figure scripts for quality-diversity run artifacts. Consumes the
metrics CSV and container dump formats only; no engine imports."""

from .figures import FigureSpec, median_iqr, plot_bd_scatter, plot_dim_sweep, plot_progression
from .io import read_dump, read_metrics

__all__ = [
    "FigureSpec",
    "median_iqr",
    "plot_bd_scatter",
    "plot_dim_sweep",
    "plot_progression",
    "read_dump",
    "read_metrics",
]
