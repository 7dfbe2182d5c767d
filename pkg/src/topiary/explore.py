"""Exploration: pick replacement neighbors biased toward weak topics.

After a node settles on the subset it keeps, it grades that subset per
subscribed topic (coverage and delay only; wastage is subset-wide, not
topic-attributable). Topics whose per-topic cost exceeds the threshold
multiple of the best topic's cost form the underperforming set. Replacement
candidates are then drawn without replacement, each weighted by how many
underperforming topics it subscribes to; if the set is empty or no candidate
overlaps it, the draw falls back to uniform.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, SamplingError
from .gossip import ObservationLog
from .netmodel import SubscriptionTable
from .scoring import (
    NeighborObservations,
    ScoreWeights,
    observations_from_log,
    _mean_ascending,
)


@dataclass(frozen=True)
class TopicScore:
    topic: int
    delay: float
    coverage: float
    total: float


@dataclass(frozen=True)
class ExplorationPlan:
    underperforming: tuple[int, ...]
    replaced: tuple[int, ...]
    added: tuple[int, ...]


def per_topic_scores_core(
    obs: NeighborObservations, cols: Sequence[int], weights: ScoreWeights
) -> list[TopicScore]:
    """Grade one subset per subscribed topic (coverage + delay, no wastage)."""
    mins = obs.tilde[:, cols].min(axis=1) if obs.tilde.shape[0] else np.empty(0)
    finite = np.isfinite(mins)
    scores = []
    for topic in obs.subscribed:
        published = obs.published_by_topic.get(topic, 0)
        if published <= 0:
            raise ConfigurationError(f"no messages published on subscribed topic {topic}")
        row_mask = (obs.topic_of == topic) & finite
        if row_mask.any():
            f_d = _mean_ascending(mins[row_mask].tolist())
            delivered = int(row_mask.sum())
        else:
            f_d = obs.sentinel
            delivered = 0
        f_c = min(1.0, max(0.0, 1.0 - delivered / published))
        total = weights.coverage_weight * f_c + weights.delay_weight * f_d
        scores.append(TopicScore(topic, f_d, f_c, total))
    return scores


def per_topic_scores(
    retained: Sequence[int],
    log: ObservationLog,
    subscribed: Iterable[int],
    published_by_topic: Mapping[int, int],
    weights: ScoreWeights,
) -> list[TopicScore]:
    obs = observations_from_log(log, sorted(retained), subscribed, published_by_topic)
    return per_topic_scores_core(obs, obs.columns(sorted(retained)), weights)


def underperforming_topics(scores: Sequence[TopicScore], threshold: float) -> set[int]:
    """Topics costing more than threshold times the cheapest topic.

    With threshold > 1 and nonnegative costs the cheapest topic itself never
    qualifies, so the set is always a proper subset.
    """
    if threshold <= 1.0:
        raise ConfigurationError(f"threshold must exceed 1, got {threshold}")
    if not scores:
        return set()
    floor = min(s.total for s in scores)
    return {s.topic for s in scores if s.total > threshold * floor}


def candidate_weights(
    underperforming: Iterable[int],
    subs: SubscriptionTable,
    exclude: Iterable[int],
) -> dict[int, int]:
    """Overlap counts |topics(u) ∩ underperforming| for every eligible node."""
    under = set(underperforming)
    excluded = set(exclude)
    weights = {}
    for u in range(subs.n):
        if u in excluded:
            continue
        weights[u] = len(subs.topics_of[u] & under)
    return weights


def sample_replacements(weights: Mapping[int, int], count: int, rng: Random) -> list[int]:
    """Draw `count` distinct candidates, weight-proportionally without replacement.

    Each draw removes the winner and renormalizes. A zero total weight (for
    example an empty underperforming set upstream) degrades to uniform draws.
    """
    pool = sorted(weights)
    if count > len(pool):
        raise SamplingError(f"need {count} replacements but only {len(pool)} candidates")
    if count < 0:
        raise ConfigurationError(f"count must be >= 0, got {count}")
    values = [weights[u] for u in pool]
    if any(w < 0 for w in values):
        raise ConfigurationError("candidate weights must be nonnegative")
    chosen: list[int] = []
    for _ in range(count):
        total = sum(values)
        if total > 0:
            x = rng.random() * total
            acc = 0.0
            idx = len(pool) - 1
            for i, w in enumerate(values):
                acc += w
                if x < acc:
                    idx = i
                    break
        else:
            idx = rng.randrange(len(pool))
        chosen.append(pool.pop(idx))
        values.pop(idx)
    return chosen


def write_exploration_csv(path, rows: Iterable[tuple[int, int, ExplorationPlan]]) -> None:
    """Log rewire decisions: (epoch, node_id, underperforming topics, swaps)."""
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "node_id", "underperforming_topics", "replaced_neighbors", "new_neighbors"])
        for epoch, node, plan in rows:
            w.writerow(
                [
                    epoch,
                    node,
                    "|".join(str(t) for t in plan.underperforming),
                    "|".join(str(u) for u in plan.replaced),
                    "|".join(str(u) for u in plan.added),
                ]
            )
