"""Run the desk-scale preset across its seeds and write every CSV artifact.

Produces per-seed metrics.csv, score_dist.csv, overlay snapshots, and the
across-seed summary.csv, the inputs for convergence and score-distribution
figures.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from topiary.config import PRESETS
from topiary.experiment import run_experiment


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/desk-scale-200", help="output directory")
    parser.add_argument("--seeds", type=int, nargs="+", default=None, help="override preset seeds")
    parser.add_argument("--epochs", type=int, default=None, help="override epoch count")
    parser.add_argument("--parallel", type=int, default=1, help="worker processes across seeds")
    args = parser.parse_args(argv)

    config = replace(PRESETS["desk-scale-200"], out_dir=args.out)
    if args.seeds:
        config = replace(config, seeds=tuple(args.seeds))
    if args.epochs:
        config = replace(config, num_epochs=args.epochs)

    outcome = run_experiment(config, parallel=args.parallel)
    for result in outcome.results:
        print(f"seed {result.seed}: {len(result.reports)} epochs -> {result.out_dir}")
    for seed, stage, message in outcome.failures:
        print(f"seed {seed} failed at stage {stage}: {message}", file=sys.stderr)
    if outcome.summary_path:
        print(f"summary -> {outcome.summary_path}")
    return 0 if outcome.ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
