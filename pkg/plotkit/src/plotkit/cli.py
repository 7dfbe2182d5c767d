"""Command line entry point: render one figure kind from CSV inputs."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from plotkit import FIGURE_KINDS
from plotkit import figures, readers

MULTI_INPUT_KINDS = {"convergence-curves"}


def _default_labels(paths: list[Path]) -> list[str]:
    """Shortest distinct path suffixes, so curve labels stay readable."""
    bare = [path.with_suffix("") for path in paths]
    max_depth = max(len(path.parts) for path in bare)
    for depth in range(1, max_depth + 1):
        labels = ["/".join(path.parts[-depth:]) for path in bare]
        if len(set(labels)) == len(labels):
            return labels
    return [str(path) for path in bare]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render figures from overlay-simulation CSV files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    plot = sub.add_parser("plot", help="render a single figure")
    plot.add_argument("kind", choices=FIGURE_KINDS)
    plot.add_argument(
        "--in",
        dest="inputs",
        nargs="+",
        required=True,
        metavar="FILE",
        help="input CSV file(s); only convergence-curves accepts several",
    )
    plot.add_argument(
        "--out", required=True, metavar="PATH", help="output .svg or .png"
    )
    plot.add_argument(
        "--labels",
        nargs="+",
        default=None,
        help="curve labels for convergence-curves, one per input",
    )
    plot.add_argument(
        "--epochs",
        nargs="+",
        type=int,
        default=None,
        help="epoch subset for score-distribution (default: all epochs)",
    )
    return parser


def _build_figure(args: argparse.Namespace):
    paths = [Path(text) for text in args.inputs]
    if args.kind not in MULTI_INPUT_KINDS and len(paths) != 1:
        raise ValueError(
            f"{args.kind} takes exactly one input file, got {len(paths)}"
        )
    if args.kind == "convergence-curves":
        labels = args.labels or _default_labels(paths)
        if len(labels) != len(paths):
            raise ValueError(
                f"got {len(labels)} labels for {len(paths)} input files"
            )
        inputs = [
            (label, readers.read_metric_series(path))
            for label, path in zip(labels, paths)
        ]
        return figures.convergence_curves(inputs)
    if args.kind == "score-distribution":
        curves = readers.read_score_distribution(paths[0])
        return figures.score_distribution(curves, epochs=args.epochs)
    if args.kind == "topology-comparison":
        return figures.topology_comparison(
            readers.read_policy_comparison(paths[0])
        )
    if args.kind == "parameter-sweep":
        return figures.parameter_sweep(readers.read_weight_sweep(paths[0]))
    if args.kind == "attack-impact":
        return figures.attack_impact(readers.read_attack_series(paths[0]))
    raise ValueError(f"unknown figure kind {args.kind!r}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        figure = _build_figure(args)
        figures.save_figure(figure, args.out)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
