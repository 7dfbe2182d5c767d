"""Sweep the delay weight and record the coverage/delay trade-off.

The combined cost multiplies the delay term by weights in the thousands,
so the latency unit decides whether the coverage term can compete at all.
This sweep expresses the desk-scale geometry in units where the two terms
cross inside the swept range, runs TTL 0 so coverage is decided by the
chosen edges alone, and writes one row per (weight, seed) with final-10
epoch means.
"""

from __future__ import annotations

import argparse
import csv
import math
import os

from topiary.gossip import make_schedule, run_epoch
from topiary.metrics import build_report
from topiary.netmodel import LatencyModel, build_subscriptions, random_overlay, unit_square_latency
from topiary.protocols import update_all
from topiary.rng import derive_rng
from topiary.scoring import ScoreWeights, build_epoch_observations


def sweep_run(seed: int, delay_weight: float, epochs: int, scale: float):
    n, degree, switch, topics, interest, msgs = 200, 6, 2, 20, 0.4, 200
    base = unit_square_latency(n, derive_rng(seed, "latency"))
    lat = LatencyModel(delays=base.delays * scale, processing=base.processing * scale)
    subs = build_subscriptions(n, topics, interest, derive_rng(seed, "subs"))
    overlay = random_overlay(n, degree, derive_rng(seed, "overlay"))
    weights = ScoreWeights(
        coverage_weight=1.0,
        delay_weight=delay_weight,
        wastage_weight=0.0,
        explore_threshold=2.0,
        keep_count=degree - switch,
        switch_count=switch,
    )
    interval = 10.0 * lat.quantile_delay(0.99)
    span = math.ceil(msgs / topics) * interval
    rates, delays = [], []
    for epoch in range(epochs):
        schedule = make_schedule(
            subs,
            epoch,
            msgs,
            0,
            epoch_start=epoch * span,
            round_interval=interval,
            first_msg_id=epoch * msgs,
            rng=derive_rng(seed, "schedule", epoch),
        )
        trace = run_epoch(overlay, subs, lat, schedule)
        observations = build_epoch_observations(trace, overlay, subs)
        overlay, _retained, _plans = update_all(overlay, observations, subs, weights, seed, epoch)
        report = build_report(trace, subs)
        rates.append(report.receive_rate)
        delays.append(report.avg_delay)
    return sum(rates[-10:]) / 10, sum(delays[-10:]) / 10


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--weights", type=float, nargs="+", default=[1e3, 3e3, 1e4], help="delay weights to sweep"
    )
    parser.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3])
    parser.add_argument("--epochs", type=int, default=40)
    parser.add_argument("--scale", type=float, default=2e-4, help="latency unit multiplier")
    parser.add_argument("--out", default="runs/wd_sweep/sweep.csv")
    args = parser.parse_args(argv)

    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["delay_weight", "seed", "final_coverage", "final_delay"])
        for wd in args.weights:
            covs, dels = [], []
            for seed in args.seeds:
                coverage, delay = sweep_run(seed, wd, args.epochs, args.scale)
                writer.writerow([f"{wd:g}", seed, repr(coverage), repr(delay)])
                covs.append(coverage)
                dels.append(delay)
            print(
                f"w_d={wd:g}: coverage mean {sum(covs)/len(covs):.5f}, "
                f"delay mean {sum(dels)/len(dels):.6e}"
            )
    print(f"sweep -> {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
