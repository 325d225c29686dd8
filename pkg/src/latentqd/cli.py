"""Command-line entry points.

    latentqd run --config <file-or-preset> [--set key=value ...]
    latentqd metrics --dump <container.csv> --task <maze|airhockey>

`run` executes `replications` runs with seeds seed, seed+1, ... and writes
per-replication artifacts under <output root>/<output_dir>/<variant>/rep<i>/
(metrics.csv, container.csv, encoder.ckpt) plus the resolved configuration
at <...>/<variant>/config.resolved. The output root is the LATENTQD_OUTPUT_ROOT
environment variable, defaulting to the current directory.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import engine
from .config import ConfigError, ExperimentConfig
from .container import read_container_dump, write_container_dump
from .metrics import coverage, grid_mean_fitness, write_metrics_csv
from .reduction import save_model
from .tasks import TASK_NAMES, get_task

OUTPUT_ROOT_ENV = "LATENTQD_OUTPUT_ROOT"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def run_experiment(config_source, overrides: list[str] | None = None,
                   output_root: str | None = None) -> int:
    """Execute all replications of one experiment; returns an exit code."""
    exp = ExperimentConfig.load(config_source, overrides)
    root = output_root or os.environ.get(OUTPUT_ROOT_ENV, ".")
    variant = exp.variant()
    base = Path(root) / exp.output_dir / variant.label()
    base.mkdir(parents=True, exist_ok=True)
    (base / "config.resolved").write_text(exp.resolved_text())
    for rep in range(exp.replications):
        cfg = exp.run_config(seed=exp.seed + rep)
        result = engine.run(cfg, variant)
        rep_dir = base / f"rep{rep}"
        rep_dir.mkdir(parents=True, exist_ok=True)
        write_metrics_csv(result.records, rep_dir / "metrics.csv")
        write_container_dump(result.container, rep_dir / "container.csv", replication=rep)
        if result.encoder is not None:
            save_model(result.encoder, rep_dir / "encoder.ckpt")
        task = get_task(cfg.task, world_file=cfg.world_file)
        final_cov = coverage(result.container.individuals, task.bd_bounds)
        print(
            f"{variant.label()}/rep{rep}: seed={cfg.seed} "
            f"coverage={final_cov:.2f}% size={len(result.container)}"
        )
    return EXIT_OK


def recompute_metrics(dump_path, task_id: str) -> int:
    """Recompute coverage and grid mean fitness from a container dump."""
    if task_id not in TASK_NAMES:
        raise ConfigError(f"unknown task {task_id!r}")
    task = get_task(task_id)
    records = read_container_dump(dump_path)
    cov = coverage(records, task.bd_bounds)
    fit = grid_mean_fitness(records, task.bd_bounds)
    print(f"container_size={len(records)}")
    print(f"coverage_pct={cov!r}")
    print(f"grid_mean_fitness={'' if fit is None else repr(fit)}")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latentqd",
        description="Quality-diversity runs with learned latent descriptors",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run an experiment from a config file or preset")
    run_p.add_argument("--config", required=True, help="config file path or preset name")
    run_p.add_argument(
        "--set", action="append", default=[], dest="overrides", metavar="KEY=VALUE",
        help="override a config key (repeatable)",
    )
    met_p = sub.add_parser("metrics", help="recompute metrics from a container dump")
    met_p.add_argument("--dump", required=True)
    met_p.add_argument("--task", required=True, choices=TASK_NAMES)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "run":
            return run_experiment(args.config, args.overrides)
        return recompute_metrics(args.dump, args.task)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
