"""Run the desk-scale network under attack and write attack_metrics.csv.

Two attacker models: topic-withhold (subscribers of a victim topic that
never relay it) and eclipse (a fully connected clique that forwards
honestly while competing for outgoing slots). The withhold run uses TTL 0
so victim coverage actually depends on who relays; the eclipse run keeps
the preset's TTL.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from topiary.adversary import AttackConfig
from topiary.config import PRESETS
from topiary.experiment import run_experiment


def attack_config(kind: str, out_dir: str, attackers: int, victim: int):
    base = PRESETS["desk-scale-200"]
    if kind == "withhold":
        return replace(
            base,
            initial_ttl=0,
            attack=AttackConfig(
                kind="topic-withhold", attacker_count=attackers, victim_topic=victim
            ),
            out_dir=f"{out_dir}/withhold",
        )
    return replace(
        base,
        attack=AttackConfig(kind="eclipse", attacker_count=attackers),
        out_dir=f"{out_dir}/eclipse",
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--attack", choices=["withhold", "eclipse", "both"], default="both")
    parser.add_argument("--attackers", type=int, default=60, help="attacker cohort size")
    parser.add_argument("--victim-topic", type=int, default=0, help="withheld topic id")
    parser.add_argument("--out", default="runs/attacks", help="output directory")
    parser.add_argument("--parallel", type=int, default=1, help="worker processes across seeds")
    args = parser.parse_args(argv)

    kinds = ["withhold", "eclipse"] if args.attack == "both" else [args.attack]
    failed = False
    for kind in kinds:
        config = attack_config(kind, args.out, args.attackers, args.victim_topic)
        outcome = run_experiment(config, parallel=args.parallel)
        for result in outcome.results:
            print(f"{kind} seed {result.seed} -> {result.out_dir}/attack_metrics.csv")
        for seed, stage, message in outcome.failures:
            print(f"{kind} seed {seed} failed at stage {stage}: {message}", file=sys.stderr)
            failed = True
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
