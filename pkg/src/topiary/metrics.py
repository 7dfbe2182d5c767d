"""Per-epoch performance measures and the CSV output pipeline.

Measures follow fixed arithmetic conventions so independently written
checkers can match them bit for bit: per-message values are averaged in
ascending message-id order, pooled delays iterate (message id, receiver id)
ascending, and per-node score means run in ascending node order. Every float
is serialized with repr(), so equal runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import IngestionError
from .gossip import EpochTrace
from .netmodel import OverlayGraph, SubscriptionTable

MEASURES = ("receive_rate", "avg_delay", "avg_neighbor_score")


@dataclass(eq=False)
class EpochReport:
    """One epoch's headline measures plus per-topic breakdowns."""

    epoch: int
    receive_rate: Optional[float]
    avg_delay: Optional[float]
    avg_neighbor_score: Optional[float]
    score_distribution: tuple[float, ...]
    rate_by_topic: dict[int, Optional[float]] = field(default_factory=dict)
    delay_by_topic: dict[int, Optional[float]] = field(default_factory=dict)


def _mean(values: list[float]) -> Optional[float]:
    if not values:
        return None
    return sum(values) / len(values)


def _per_message_rows(trace: EpochTrace, subs: SubscriptionTable):
    """Yield (message, interested receiver ids asc, their first times).

    Interested means subscribed to the message's topic and not the publisher.
    """
    order = np.lexsort((trace.first_node, trace.first_msg))
    msgs = trace.first_msg[order]
    nodes = trace.first_node[order]
    times = trace.first_time[order]
    sub_mat = subs.matrix()
    for msg in trace.messages:
        lo = np.searchsorted(msgs, msg.id, side="left")
        hi = np.searchsorted(msgs, msg.id, side="right")
        recv = nodes[lo:hi]
        t = times[lo:hi]
        keep = sub_mat[recv, msg.topic] & (recv != msg.publisher)
        yield msg, recv[keep], t[keep]


def receive_rate(trace: EpochTrace, subs: SubscriptionTable) -> Optional[float]:
    """Mean over messages of the fraction of co-subscribers reached.

    The publisher is excluded from both sides of each ratio; messages on
    single-subscriber topics are skipped. None when every message is skipped.
    """
    rates = []
    for msg, recv, _ in _per_message_rows(trace, subs):
        denom = len(subs.subscribers(msg.topic)) - 1
        if denom <= 0:
            continue
        rates.append(len(recv) / denom)
    return _mean(rates)


def avg_propagation_delay(trace: EpochTrace, subs: SubscriptionTable) -> Optional[float]:
    """Pooled mean of first_receipt - publish_time over interested receivers.

    Subscribers that never received a message contribute nothing. None marks
    an epoch with no interested delivery at all.
    """
    delays: list[float] = []
    for msg, _, t in _per_message_rows(trace, subs):
        delays.extend(ti - msg.publish_time for ti in t.tolist())
    return _mean(delays)


def per_topic_rates_and_delays(
    trace: EpochTrace, subs: SubscriptionTable
) -> tuple[dict[int, Optional[float]], dict[int, Optional[float]]]:
    """receive_rate and pooled delay restricted to each topic's messages."""
    rates: dict[int, list[float]] = {}
    delays: dict[int, list[float]] = {}
    for msg, recv, t in _per_message_rows(trace, subs):
        denom = len(subs.subscribers(msg.topic)) - 1
        if denom > 0:
            rates.setdefault(msg.topic, []).append(len(recv) / denom)
        delays.setdefault(msg.topic, []).extend(ti - msg.publish_time for ti in t.tolist())
    topics = sorted(set(rates) | set(delays))
    return (
        {k: _mean(rates.get(k, [])) for k in topics},
        {k: _mean(delays.get(k, [])) for k in topics},
    )


def score_statistics(scores: Sequence[float]) -> tuple[Optional[float], tuple[float, ...]]:
    """Mean of the per-node retained-subset totals and their sorted vector."""
    values = [float(s) for s in scores]
    return _mean(values), tuple(sorted(values))


def build_report(
    trace: EpochTrace,
    subs: SubscriptionTable,
    retained_scores: Optional[Sequence[float]] = None,
) -> EpochReport:
    avg_score, dist = score_statistics(retained_scores) if retained_scores is not None else (None, ())
    rate_by_topic, delay_by_topic = per_topic_rates_and_delays(trace, subs)
    return EpochReport(
        epoch=trace.epoch,
        receive_rate=receive_rate(trace, subs),
        avg_delay=avg_propagation_delay(trace, subs),
        avg_neighbor_score=avg_score,
        score_distribution=dist,
        rate_by_topic=rate_by_topic,
        delay_by_topic=delay_by_topic,
    )


def _fmt(value: Optional[float]) -> str:
    if value is None:
        return "nan"
    return repr(float(value))


def metrics_rows(reports: Sequence[EpochReport]) -> list[tuple[int, str, str]]:
    """Long-format (epoch, measure, value) rows, per-topic measures included."""
    rows: list[tuple[int, str, str]] = []
    for r in reports:
        rows.append((r.epoch, "receive_rate", _fmt(r.receive_rate)))
        rows.append((r.epoch, "avg_delay", _fmt(r.avg_delay)))
        rows.append((r.epoch, "avg_neighbor_score", _fmt(r.avg_neighbor_score)))
        for topic in sorted(r.rate_by_topic):
            rows.append((r.epoch, f"receive_rate_topic_{topic}", _fmt(r.rate_by_topic[topic])))
        for topic in sorted(r.delay_by_topic):
            rows.append((r.epoch, f"avg_delay_topic_{topic}", _fmt(r.delay_by_topic[topic])))
    return rows


def write_reports(
    reports: Sequence[EpochReport],
    out_dir: str,
    overlays: Optional[Mapping[int, OverlayGraph]] = None,
) -> None:
    """Emit metrics.csv, score_dist.csv and optional overlay edge lists."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "metrics.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "measure", "value"])
        w.writerows(metrics_rows(reports))
    with open(os.path.join(out_dir, "score_dist.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "rank", "score"])
        for r in reports:
            for rank, score in enumerate(r.score_distribution):
                w.writerow([r.epoch, rank, repr(float(score))])
    if overlays:
        for epoch in sorted(overlays):
            overlays[epoch].write_csv(os.path.join(out_dir, f"overlay_epoch_{epoch}.csv"), epoch)


def config_hash(config_dict: Mapping) -> str:
    blob = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def write_manifest(config_dict: Mapping, seed: int, path: str) -> None:
    """Full config plus seed and config hash; no wall-clock fields."""
    payload = {"config": config_dict, "seed": seed, "config_sha256": config_hash(config_dict)}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_attack_metrics(rows: Sequence[tuple[int, Optional[float], Optional[float], float]], path: str) -> None:
    """(epoch, victim coverage, victim delay, attacker capture share) rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "victim_topic_coverage", "victim_topic_delay", "attacker_outgoing_fraction"])
        for epoch, cov, dly, frac in rows:
            w.writerow([epoch, _fmt(cov), _fmt(dly), repr(float(frac))])


def read_metrics_csv(path: str) -> list[tuple[int, str, float]]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expected = {"epoch", "measure", "value"}
        if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
            raise IngestionError(f"{path} lacks columns {sorted(expected)}")
        for row in reader:
            rows.append((int(row["epoch"]), row["measure"], float(row["value"])))
    return rows


def summarize_seed_metrics(per_seed_rows: Sequence[Sequence[tuple[int, str, float]]]) -> list[tuple[int, str, float, float]]:
    """Across-seed mean and population stddev per (epoch, measure).

    Input rows keep their per-seed order; (epoch, measure) keys must appear
    in every seed. NaNs propagate into the mean.
    """
    if not per_seed_rows:
        return []
    keys = [(epoch, measure) for epoch, measure, _ in per_seed_rows[0]]
    tables = []
    for rows in per_seed_rows:
        table = {(epoch, measure): value for epoch, measure, value in rows}
        if set(table) != set(keys):
            raise IngestionError("seed outputs disagree on (epoch, measure) keys")
        tables.append(table)
    out = []
    for epoch, measure in keys:
        values = [table[(epoch, measure)] for table in tables]
        mean = sum(values) / len(values)
        var = sum((v - mean) ** 2 for v in values) / len(values)
        out.append((epoch, measure, mean, math.sqrt(var) if not math.isnan(var) else float("nan")))
    return out


def write_summary(summary_rows: Sequence[tuple[int, str, float, float]], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "measure", "mean", "std"])
        for epoch, measure, mean, std in summary_rows:
            w.writerow([epoch, measure, repr(float(mean)), repr(float(std))])
