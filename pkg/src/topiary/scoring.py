"""Neighbor-subset scoring from one epoch of delivery observations.

All three component scores are costs (lower is better):

* delay score: mean, over subscribed messages the subset delivered, of the
  earliest normalized delivery timestamp among subset members. Timestamps
  are normalized per message against the earliest arrival from any neighbor
  (incoming ones included), so 0 means "this subset contained the first
  deliverer". A subset that delivered no subscribed message at all is
  charged a sentinel: twice the largest finite normalized delay the node
  observed this epoch (0.0 if it observed nothing).
* coverage score: miss fraction, 1 - delivered/published, over messages
  published on the node's subscribed topics, clamped to [0, 1]. Published
  counts are supplied externally (the simulator uses ground truth).
* wastage score: the number of messages on unsubscribed topics that at
  least one subset member delivered (messages, not copies).

The combined score is coverage_weight*coverage + delay_weight*delay +
wastage_weight*wastage, evaluated left to right.

Arithmetic conventions are part of the contract so independently written
checkers can reproduce results exactly: means sum their terms in ascending
message-id order with plain left-to-right float addition before a single
division, and subset enumeration is in lexicographic order of ascending
member ids with ties keeping the earliest subset.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import ConfigurationError
from .gossip import EpochTrace, ObservationLog
from .netmodel import OverlayGraph, SubscriptionTable


@dataclass(frozen=True)
class ScoreWeights:
    """Weights for the combined cost plus the churn split of the degree.

    keep_count + switch_count must equal the overlay degree: each epoch a
    node retains its best keep_count outgoing neighbors and replaces the
    other switch_count by exploration. explore_threshold (> 1) controls
    which topics count as underperforming during exploration.
    """

    coverage_weight: float = 1.0
    delay_weight: float = 3000.0
    wastage_weight: float = 0.0
    explore_threshold: float = 2.0
    keep_count: int = 4
    switch_count: int = 2
    # Comparison mode only: score the delivered fraction instead of the miss
    # fraction, flipping the coverage term's direction.
    coverage_delivered_fraction: bool = False

    def __post_init__(self):
        for name in ("coverage_weight", "delay_weight", "wastage_weight"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0")
        if self.coverage_weight == 0 and self.delay_weight == 0 and self.wastage_weight == 0:
            raise ConfigurationError("at least one score weight must be positive")
        if self.explore_threshold <= 1.0:
            raise ConfigurationError(
                f"explore_threshold must exceed 1, got {self.explore_threshold}"
            )
        if self.keep_count < 1:
            raise ConfigurationError(f"keep_count must be >= 1, got {self.keep_count}")
        if self.switch_count < 0:
            raise ConfigurationError(f"switch_count must be >= 0, got {self.switch_count}")

    @property
    def degree(self) -> int:
        return self.keep_count + self.switch_count


@dataclass(frozen=True)
class SubsetScore:
    members: tuple[int, ...]
    delay: float
    coverage: float
    wastage: float
    total: float


@dataclass(eq=False)
class NeighborObservations:
    """One node's epoch view of its candidate neighbors' deliveries.

    tilde[m, k] is the normalized delivery timestamp of message row m from
    candidate k (inf when that candidate never delivered it). Rows are in
    ascending message-id order and only cover messages at least one candidate
    delivered. The sentinel is the node-level empty-delivery charge.
    """

    node: int
    candidates: tuple[int, ...]
    tilde: np.ndarray
    topic_of: np.ndarray
    interested: np.ndarray
    subscribed: tuple[int, ...]
    published_by_topic: dict[int, int]
    sentinel: float

    @property
    def interested_published(self) -> int:
        for topic in self.subscribed:
            if self.published_by_topic.get(topic, 0) <= 0:
                raise ConfigurationError(
                    f"no published count for subscribed topic {topic}; "
                    "per-topic publication counts must be positive"
                )
        return sum(self.published_by_topic[t] for t in self.subscribed)

    def columns(self, subset: Iterable[int]) -> list[int]:
        index = {u: k for k, u in enumerate(self.candidates)}
        try:
            return [index[u] for u in subset]
        except KeyError as exc:
            raise ConfigurationError(f"subset member {exc.args[0]} is not a candidate") from None


def _mean_ascending(values: list[float]) -> float:
    # Plain left-to-right sum; callers pass values in ascending message order.
    return sum(values) / len(values)


def _subset_mins(obs: NeighborObservations, cols: Sequence[int]) -> np.ndarray:
    if obs.tilde.shape[0] == 0:
        return np.empty(0)
    return obs.tilde[:, cols].min(axis=1)


def delay_score_core(obs: NeighborObservations, cols: Sequence[int]) -> float:
    mins = _subset_mins(obs, cols)
    mask = obs.interested & np.isfinite(mins)
    if not mask.any():
        return obs.sentinel
    return _mean_ascending(mins[mask].tolist())


def coverage_score_core(
    obs: NeighborObservations, cols: Sequence[int], delivered_fraction: bool = False
) -> float:
    total = obs.interested_published
    if total <= 0:
        raise ConfigurationError("no messages published on subscribed topics")
    mins = _subset_mins(obs, cols)
    delivered = int((obs.interested & np.isfinite(mins)).sum())
    if delivered_fraction:
        return min(1.0, max(0.0, delivered / total))
    miss = 1.0 - delivered / total
    return min(1.0, max(0.0, miss))


def wastage_score_core(obs: NeighborObservations, cols: Sequence[int]) -> float:
    mins = _subset_mins(obs, cols)
    return float(int((~obs.interested & np.isfinite(mins)).sum()))


def combined_score_core(
    obs: NeighborObservations, subset: Sequence[int], weights: ScoreWeights
) -> SubsetScore:
    cols = obs.columns(subset)
    f_d = delay_score_core(obs, cols)
    f_c = coverage_score_core(obs, cols, weights.coverage_delivered_fraction)
    f_w = wastage_score_core(obs, cols)
    total = (
        weights.coverage_weight * f_c + weights.delay_weight * f_d + weights.wastage_weight * f_w
    )
    return SubsetScore(tuple(subset), f_d, f_c, f_w, total)


def score_all_subsets(
    obs: NeighborObservations, outgoing: Sequence[int], weights: ScoreWeights
) -> list[SubsetScore]:
    """Every keep_count-subset scored, in lexicographic member order."""
    members = sorted(outgoing)
    if weights.keep_count > len(members):
        raise ConfigurationError(
            f"keep_count {weights.keep_count} exceeds the {len(members)} outgoing neighbors"
        )
    return [combined_score_core(obs, subset, weights) for subset in combinations(members, weights.keep_count)]


def select_best_subset_core(
    obs: NeighborObservations, outgoing: Sequence[int], weights: ScoreWeights
) -> SubsetScore:
    """Best keep_count-subset of outgoing by combined cost, lexicographic ties."""
    best: Optional[SubsetScore] = None
    for score in score_all_subsets(obs, outgoing, weights):
        if best is None or score.total < best.total:
            best = score
    assert best is not None
    return best


def observations_from_log(
    log: ObservationLog,
    candidates: Sequence[int],
    subscribed: Iterable[int],
    published_by_topic: Mapping[int, int],
) -> NeighborObservations:
    """Adapter from an incremental observation log to the scoring layout.

    The sentinel considers every neighbor recorded in the log, not only the
    listed candidates, because normalization itself did.
    """
    candidates = tuple(sorted(candidates))
    subscribed = tuple(sorted(subscribed))
    sub_set = set(subscribed)
    index = {u: k for k, u in enumerate(candidates)}
    msg_ids = sorted(log.messages)
    rows = []
    topics = []
    interested = []
    max_tilde = 0.0
    for mid in msg_ids:
        obs = log.messages[mid]
        if obs.topic is None:
            raise ConfigurationError(f"message {mid} in the log has no recorded topic")
        row = np.full(len(candidates), np.inf)
        any_candidate = False
        for u, t in obs.arrivals.items():
            tilde = t - obs.first_time
            if tilde > max_tilde:
                max_tilde = tilde
            k = index.get(u)
            if k is not None:
                row[k] = tilde
                any_candidate = True
        if not any_candidate:
            continue
        rows.append(row)
        topics.append(obs.topic)
        interested.append(obs.topic in sub_set)
    tilde = np.array(rows) if rows else np.empty((0, len(candidates)))
    return NeighborObservations(
        node=log.owner,
        candidates=candidates,
        tilde=tilde,
        topic_of=np.array(topics, dtype=np.int64),
        interested=np.array(interested, dtype=bool),
        subscribed=subscribed,
        published_by_topic=dict(published_by_topic),
        sentinel=2.0 * max_tilde,
    )


def topic_delay_score(
    subset: Sequence[int],
    log: ObservationLog,
    subscribed: Iterable[int],
) -> float:
    obs = observations_from_log(log, sorted(subset), subscribed, {})
    return delay_score_core(obs, obs.columns(sorted(subset)))


def topic_coverage_score(
    subset: Sequence[int],
    log: ObservationLog,
    subscribed: Iterable[int],
    published_by_topic: Mapping[int, int],
) -> float:
    obs = observations_from_log(log, sorted(subset), subscribed, published_by_topic)
    return coverage_score_core(obs, obs.columns(sorted(subset)))


def bandwidth_wastage_score(
    subset: Sequence[int],
    log: ObservationLog,
    subscribed: Iterable[int],
) -> float:
    obs = observations_from_log(log, sorted(subset), subscribed, {})
    return wastage_score_core(obs, obs.columns(sorted(subset)))


def overall_score(
    subset: Sequence[int],
    log: ObservationLog,
    subscribed: Iterable[int],
    published_by_topic: Mapping[int, int],
    weights: ScoreWeights,
) -> SubsetScore:
    obs = observations_from_log(log, sorted(subset), subscribed, published_by_topic)
    return combined_score_core(obs, sorted(subset), weights)


def select_best_subset(
    outgoing: Sequence[int],
    log: ObservationLog,
    subscribed: Iterable[int],
    published_by_topic: Mapping[int, int],
    weights: ScoreWeights,
) -> SubsetScore:
    obs = observations_from_log(log, sorted(outgoing), subscribed, published_by_topic)
    return select_best_subset_core(obs, sorted(outgoing), weights)


def write_score_table(
    entries: Iterable[tuple[int, Sequence[SubsetScore], tuple[int, ...]]],
    path,
) -> None:
    """Per-node subset score table: one row per evaluated subset.

    entries yield (node_id, scored subsets, retained members).
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id", "subset_members", "f_c", "f_d", "f_w", "total", "retained_flag"])
        for node, scores, retained in entries:
            for s in scores:
                w.writerow(
                    [
                        node,
                        "|".join(str(u) for u in s.members),
                        repr(s.coverage),
                        repr(s.delay),
                        repr(s.wastage),
                        repr(s.total),
                        int(s.members == retained),
                    ]
                )


def build_epoch_observations(
    trace: EpochTrace,
    overlay: OverlayGraph,
    subs: SubscriptionTable,
) -> list[NeighborObservations]:
    """Vectorized construction of every node's NeighborObservations.

    Equivalent to building each node's ObservationLog event by event and
    adapting it with candidates = outgoing neighbors; this path just avoids
    per-event Python objects. Rows are ascending message ids, matching the
    adapter.
    """
    if not trace.has_observations:
        raise ConfigurationError("trace was collected without observations")
    n = trace.n_nodes
    base = trace.messages[0].id if trace.messages else 0
    topic_by_idx = np.array([m.topic for m in trace.messages], dtype=np.int64)
    sub_mat = subs.matrix()

    a_order = np.lexsort((trace.arrival_msg, trace.arrival_recv))
    a_recv = trace.arrival_recv[a_order]
    a_msg = trace.arrival_msg[a_order]
    a_snd = trace.arrival_sender[a_order]
    a_time = trace.arrival_time[a_order]

    a_bounds = np.searchsorted(a_recv, np.arange(n + 1))

    out: list[NeighborObservations] = []
    for v in range(n):
        candidates = tuple(sorted(overlay.outgoing_of(v)))
        cand_arr = np.array(candidates, dtype=np.int64)
        subscribed = tuple(sorted(subs.topics_of[v]))
        published = {t: trace.published_by_topic.get(t, 0) for t in subscribed}

        lo, hi = a_bounds[v], a_bounds[v + 1]
        if lo == hi:
            out.append(
                NeighborObservations(
                    node=v,
                    candidates=candidates,
                    tilde=np.empty((0, len(candidates))),
                    topic_of=np.empty(0, dtype=np.int64),
                    interested=np.empty(0, dtype=bool),
                    subscribed=subscribed,
                    published_by_topic=published,
                    sentinel=0.0,
                )
            )
            continue

        msgs = a_msg[lo:hi]
        snds = a_snd[lo:hi]
        times = a_time[lo:hi]
        uniq, inv = np.unique(msgs, return_inverse=True)

        # Per-message earliest arrival is the normalization reference; the
        # arrival stream is the authority (publishers see echoes of their
        # own messages, which have arrivals but no first receipt).
        starts = np.searchsorted(msgs, uniq)
        tmin = np.minimum.reduceat(times, starts)
        tilde_all = times - tmin[inv]
        sentinel = 2.0 * float(tilde_all.max()) if tilde_all.size else 0.0

        if cand_arr.size:
            slot = np.searchsorted(cand_arr, snds)
            slot[slot >= cand_arr.size] = 0
            valid = cand_arr[slot] == snds
        else:
            slot = np.zeros(0, dtype=np.int64)
            valid = np.zeros(msgs.shape, dtype=bool)
        tilde = np.full((uniq.size, len(candidates)), np.inf)
        if valid.any():
            tilde[inv[valid], slot[valid]] = tilde_all[valid]

        # Drop rows no candidate delivered; they cannot affect any subset.
        keep = np.isfinite(tilde).any(axis=1)
        tilde = tilde[keep]
        row_topics = topic_by_idx[(uniq - base)][keep]
        interested = sub_mat[v][row_topics]

        out.append(
            NeighborObservations(
                node=v,
                candidates=candidates,
                tilde=tilde,
                topic_of=row_topics,
                interested=interested,
                subscribed=subscribed,
                published_by_topic=published,
                sentinel=sentinel,
            )
        )
    return out
