"""Command-line experiment runner.

    topiary run <config.json|preset:NAME> [--seed S ...] [--out DIR]
                [--override key=value ...] [--parallel N]
    topiary validate <config.json|preset:NAME>
    topiary presets list

Exit code 0 on success; nonzero with a stage-named diagnostic otherwise.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .config import PRESETS, apply_overrides, resolve_config, validate_config
from .errors import ConfigurationError
from .experiment import run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topiary", description="Pub/sub overlay experiment runner")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a seeded experiment")
    run_p.add_argument("config", help="config JSON path or preset:NAME")
    run_p.add_argument("--seed", type=int, action="append", default=None, help="replace the config's seed list (repeatable)")
    run_p.add_argument("--out", default=None, help="replace the config's output directory")
    run_p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE", help="set a config field, dotted keys reach nested sections")
    run_p.add_argument("--parallel", type=int, default=1, help="seed-level worker processes")

    val_p = sub.add_parser("validate", help="check a config without running it")
    val_p.add_argument("config", help="config JSON path or preset:NAME")

    pre_p = sub.add_parser("presets", help="bundled configurations")
    pre_p.add_argument("action", choices=["list"])
    return parser


def _load(source: str, overrides: Sequence[str], seeds, out_dir: Optional[str]):
    config = resolve_config(source)
    if overrides:
        config = apply_overrides(config, overrides)
    extra = []
    if seeds:
        extra.append(f"seeds={list(seeds)}")
    if out_dir is not None:
        # JSON-encode so the path survives the override value parser exactly.
        extra.append(f"out_dir={json.dumps(out_dir)}")
    if extra:
        config = apply_overrides(config, extra)
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "presets":
        for name in sorted(PRESETS):
            cfg = PRESETS[name]
            net = cfg.network
            where = f"n={net.n}" if net.kind == "unit-square" else f"matrix={net.matrix_path}"
            print(
                f"{name}: {net.kind} {where}, degree={cfg.degree}, topics={cfg.num_topics}, "
                f"epochs={cfg.num_epochs}, policy={cfg.policy.kind}"
                + (f", attack={cfg.attack.kind}x{cfg.attack.attacker_count}" if cfg.attack else "")
            )
        return 0

    try:
        if args.command == "validate":
            config = _load(args.config, [], None, None)
            problems = validate_config(config)
            if problems:
                for p in problems:
                    print(f"violation: {p}", file=sys.stderr)
                return 1
            print("ok")
            return 0

        config = _load(args.config, args.override, args.seed, args.out)
        problems = validate_config(config)
        if problems:
            for p in problems:
                print(f"stage config-validate: {p}", file=sys.stderr)
            return 1
        outcome = run_experiment(config, parallel=max(1, args.parallel))
        for res in outcome.results:
            print(f"seed {res.seed}: {len(res.reports)} epochs -> {res.out_dir}")
        if outcome.summary_path:
            print(f"summary -> {outcome.summary_path}")
        for seed, stage, message in outcome.failures:
            print(f"seed {seed} failed at stage {stage}: {message}", file=sys.stderr)
        return 0 if outcome.ok else 1
    except ConfigurationError as exc:
        print(f"stage config-load: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
