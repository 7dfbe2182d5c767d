"""Overlay construction policies: the adaptive protocol and static baselines.

The adaptive policy rewires synchronously at epoch boundaries: every node
scores the keep_count-subsets of its outgoing neighbors over the finished
epoch, retains the cheapest subset, and fills the remaining switch_count
slots by exploration. Static baselines build one overlay up front and never
change it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from random import Random
from typing import Mapping, Optional, Sequence

from .errors import ConfigurationError, SamplingError
from .explore import (
    ExplorationPlan,
    candidate_weights,
    per_topic_scores_core,
    sample_replacements,
    underperforming_topics,
)
from .gossip import ObservationLog
from .netmodel import OverlayGraph, SubscriptionTable, complete_overlay, random_overlay
from .rng import derive_rng
from .scoring import (
    NeighborObservations,
    ScoreWeights,
    SubsetScore,
    observations_from_log,
    select_best_subset_core,
)

POLICY_KINDS = (
    "topiary",
    "random-static",
    "complete-static",
    "gossipsub-like",
    "scribe-random-groups",
    "scribe-topic-groups",
)


@dataclass(frozen=True)
class PolicyConfig:
    kind: str = "topiary"
    num_groups: int = 40

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ConfigurationError(f"unknown policy kind {self.kind!r}, expected one of {POLICY_KINDS}")
        if self.num_groups < 1:
            raise ConfigurationError(f"num_groups must be >= 1, got {self.num_groups}")

    @property
    def adaptive(self) -> bool:
        return self.kind == "topiary"


def initial_overlay(
    policy: PolicyConfig,
    n: int,
    degree: int,
    subs: SubscriptionTable,
    rng: Random,
) -> OverlayGraph:
    if policy.kind in ("topiary", "random-static"):
        return random_overlay(n, degree, rng)
    if policy.kind == "complete-static":
        return complete_overlay(n)
    if policy.kind == "gossipsub-like":
        return gossipsub_like_overlay(subs, degree, rng)
    if policy.kind == "scribe-random-groups":
        return scribe_overlay(subs, degree, grouping="random", num_groups=policy.num_groups, rng=rng)
    if policy.kind == "scribe-topic-groups":
        return scribe_overlay(subs, degree, grouping="by-topic", rng=rng)
    raise ConfigurationError(f"unknown policy kind {policy.kind!r}")


def gossipsub_like_overlay(subs: SubscriptionTable, degree: int, rng: Random) -> OverlayGraph:
    """Per-topic neighbor slots, round-robin over each node's topics.

    A node cycles through its subscribed topics (shuffled, so truncation at
    more topics than slots is unbiased) and fills one slot per visit with a
    uniformly drawn co-subscriber it has not already picked. Topics with no
    pickable subscriber drop out of the rotation; a node may end under-degree
    if every topic runs dry.
    """
    n = subs.n
    outgoing = []
    for v in range(n):
        order = sorted(subs.topics_of[v])
        rng.shuffle(order)
        queue = deque(order)
        chosen: list[int] = []
        while queue and len(chosen) < degree:
            topic = queue.popleft()
            pool = [u for u in subs.subscribers(topic) if u != v and u not in chosen]
            if not pool:
                continue
            chosen.append(pool[rng.randrange(len(pool))])
            queue.append(topic)
        outgoing.append(tuple(sorted(chosen)))
    return OverlayGraph(n, outgoing, degree)


def scribe_overlay(
    subs: SubscriptionTable,
    degree: int,
    grouping: str = "random",
    num_groups: int = 40,
    rng: Optional[Random] = None,
) -> OverlayGraph:
    """Per-group dissemination trees under a global out-degree budget.

    Groups are either a random partition of the nodes or one group per topic
    (so a node joins one tree per subscription). Within a group, members are
    processed in ascending id; each attaches as the child of the earliest
    already-processed member that still has out-degree budget. The budget of
    `degree` is global across groups, so nodes in many groups exhaust it and
    later members can end up parentless, fragmenting those trees.
    """
    n = subs.n
    if grouping == "random":
        if rng is None:
            raise ConfigurationError("random grouping requires an rng")
        groups: list[list[int]] = [[] for _ in range(num_groups)]
        for v in range(n):
            groups[rng.randrange(num_groups)].append(v)
    elif grouping == "by-topic":
        groups = [list(subs.subscribers(t)) for t in range(subs.num_topics)]
    else:
        raise ConfigurationError(f"unknown grouping {grouping!r}, expected 'random' or 'by-topic'")

    budget = [degree] * n
    children: list[set[int]] = [set() for _ in range(n)]
    for members in groups:
        members = sorted(members)
        attached: list[int] = []
        for i, m in enumerate(members):
            if i > 0:
                for parent in attached:
                    if budget[parent] > 0 and m not in children[parent] and parent != m:
                        children[parent].add(m)
                        budget[parent] -= 1
                        break
            attached.append(m)
    outgoing = [tuple(sorted(c)) for c in children]
    return OverlayGraph(n, outgoing, degree)


def topiary_update_core(
    obs: NeighborObservations,
    subs: SubscriptionTable,
    weights: ScoreWeights,
    rng: Random,
) -> tuple[tuple[int, ...], SubsetScore, ExplorationPlan]:
    """One node's epoch-boundary rewire: retain best subset, explore the rest."""
    outgoing = obs.candidates
    if len(outgoing) != weights.degree:
        raise ConfigurationError(
            f"node {obs.node} has {len(outgoing)} outgoing neighbors, expected {weights.degree}"
        )
    best = select_best_subset_core(obs, outgoing, weights)
    topic_scores = per_topic_scores_core(obs, obs.columns(best.members), weights)
    under = underperforming_topics(topic_scores, weights.explore_threshold)
    w = candidate_weights(under, subs, exclude=set(best.members) | {obs.node})
    added = sample_replacements(w, weights.switch_count, rng)
    replaced = tuple(sorted(set(outgoing) - set(best.members)))
    new_outgoing = tuple(sorted(set(best.members) | set(added)))
    return new_outgoing, best, ExplorationPlan(tuple(sorted(under)), replaced, tuple(sorted(added)))


def topiary_epoch_update(
    node: int,
    log: ObservationLog,
    subs: SubscriptionTable,
    outgoing: Sequence[int],
    published_by_topic: Mapping[int, int],
    weights: ScoreWeights,
    rng: Random,
) -> tuple[tuple[int, ...], SubsetScore, ExplorationPlan]:
    if log.owner != node:
        raise ConfigurationError(f"log belongs to node {log.owner}, not {node}")
    obs = observations_from_log(log, sorted(outgoing), subs.topics_of[node], published_by_topic)
    return topiary_update_core(obs, subs, weights, rng)


def update_all(
    overlay: OverlayGraph,
    observations: Sequence[NeighborObservations],
    subs: SubscriptionTable,
    weights: ScoreWeights,
    seed: int,
    epoch: int,
) -> tuple[OverlayGraph, list[SubsetScore], list[ExplorationPlan]]:
    """Synchronous rewire of every node against the same finished epoch.

    Each node draws from its own stream keyed by (seed, node, epoch), so the
    result does not depend on update order.
    """
    new_outgoing = []
    retained = []
    plans = []
    for v in range(overlay.n):
        rng = derive_rng(seed, "explore", v, epoch)
        out, best, plan = topiary_update_core(observations[v], subs, weights, rng)
        new_outgoing.append(out)
        retained.append(best)
        plans.append(plan)
    return overlay.replace_outgoing(new_outgoing), retained, plans
