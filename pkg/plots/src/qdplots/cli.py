"""qdplot: render figures from run artifacts.

    qdplot progression --out fig.png --metric coverage_pct LABEL=GLOB [...]
    qdplot scatter --dump container.csv --task maze --out fig.png
    qdplot dimsweep --out fig.png --metric container_size MODE:DIM=GLOB [...]

The image format follows the output extension (.png, .pdf, .svg, ...).
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

from .figures import plot_bd_scatter, plot_dim_sweep, plot_progression


def _parse_labelled(pairs: list[str]) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for item in pairs:
        if "=" not in item:
            raise ValueError(f"expected LABEL=GLOB, got {item!r}")
        label, pattern = item.split("=", 1)
        out.setdefault(label, []).append(pattern)
    return out


def _parse_groups(pairs: list[str]) -> dict[tuple[str, int], list[str]]:
    out: dict[tuple[str, int], list[str]] = {}
    for item in pairs:
        if "=" not in item or ":" not in item.split("=", 1)[0]:
            raise ValueError(f"expected MODE:DIM=GLOB, got {item!r}")
        key, pattern = item.split("=", 1)
        mode, dim = key.split(":", 1)
        out.setdefault((mode, int(dim)), []).append(pattern)
    return out


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdplot", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    prog_p = sub.add_parser("progression", help="median + IQR curves from metrics CSVs")
    prog_p.add_argument("series", nargs="+", metavar="LABEL=GLOB")
    prog_p.add_argument("--metric", default="coverage_pct")
    prog_p.add_argument("--out", required=True)

    scat_p = sub.add_parser("scatter", help="hand-coded BD scatter from a dump")
    scat_p.add_argument("--dump", required=True)
    scat_p.add_argument("--task", required=True, choices=("maze", "airhockey"))
    scat_p.add_argument("--out", required=True)

    dim_p = sub.add_parser("dimsweep", help="final metric vs latent dim per mode")
    dim_p.add_argument("groups", nargs="+", metavar="MODE:DIM=GLOB")
    dim_p.add_argument("--metric", default="container_size")
    dim_p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    matplotlib.use("Agg")
    args = make_parser().parse_args(argv)
    try:
        if args.command == "progression":
            plot_progression(_parse_labelled(args.series), args.metric, args.out)
        elif args.command == "scatter":
            plot_bd_scatter(args.dump, args.task, args.out)
        else:
            plot_dim_sweep(_parse_groups(args.groups), args.metric, args.out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
