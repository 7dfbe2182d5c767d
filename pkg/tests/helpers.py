"""Builders for small hand-specified and randomized test networks."""

from __future__ import annotations

from random import Random
from typing import Optional, Sequence

import numpy as np

from topiary.gossip import Message, PublicationSchedule, run_epoch
from topiary.netmodel import LatencyModel, OverlayGraph, SubscriptionTable

import oracles


def make_subs(topics_of: Sequence[set[int]], num_topics: int) -> SubscriptionTable:
    return SubscriptionTable(num_topics, tuple(frozenset(s) for s in topics_of))


def make_lat(delays, processing) -> LatencyModel:
    return LatencyModel(
        delays=np.array(delays, dtype=float), processing=np.array(processing, dtype=float)
    )


def line_overlay(n: int) -> OverlayGraph:
    """Path 0-1-...-(n-1); forward links only, neighbor view is bidirectional."""
    outgoing = [[v + 1] if v + 1 < n else [] for v in range(n)]
    return OverlayGraph(n, outgoing, degree_bound=1, enforce_bound=False)


def random_net(rng: Random, n_max: int = 8):
    """A small random (overlay, subs, lat) triple with valid invariants."""
    n = rng.randint(2, n_max)
    num_topics = rng.randint(1, 3)

    while True:
        topics_of = [
            {t for t in range(num_topics) if rng.random() < 0.6} for _ in range(n)
        ]
        for row in topics_of:
            if not row:
                row.add(rng.randrange(num_topics))
        covered = set().union(*topics_of)
        if covered == set(range(num_topics)):
            break
    subs = make_subs(topics_of, num_topics)

    outgoing = []
    for v in range(n):
        others = [u for u in range(n) if u != v]
        k = rng.randint(1, min(3, len(others)))
        outgoing.append(rng.sample(others, k))
    overlay = OverlayGraph(n, outgoing, degree_bound=3, enforce_bound=False)

    delays = np.zeros((n, n))
    for u in range(n):
        for v in range(u + 1, n):
            delays[u, v] = delays[v, u] = rng.uniform(0.05, 1.0)
    processing = np.array([rng.uniform(0.001, 0.02) for _ in range(n)])
    lat = LatencyModel(delays=delays, processing=processing)
    return overlay, subs, lat


def schedule_of(messages: Sequence[Message], epoch: int = 0) -> PublicationSchedule:
    counts: dict[int, int] = {}
    for m in messages:
        counts[m.topic] = counts.get(m.topic, 0) + 1
    return PublicationSchedule(epoch=epoch, messages=list(messages), published_by_topic=counts)


def random_messages(rng: Random, subs: SubscriptionTable, count: int, ttl_max: int = 2):
    msgs = []
    for j in range(count):
        topic = rng.randrange(subs.num_topics)
        pool = subs.subscribers(topic)
        publisher = pool[rng.randrange(len(pool))]
        msgs.append(
            Message(
                id=j,
                topic=topic,
                publisher=publisher,
                publish_time=rng.uniform(0.0, 5.0),
                initial_ttl=rng.randint(0, ttl_max),
            )
        )
    return msgs


def oracle_run(overlay, subs, lat, messages, blocked_of=None):
    """Reference propagation of each message: (firsts, arrivals) per message."""
    neighbor_map = overlay.neighbor_lists()
    delays = lat.delay_lists()
    processing = lat.processing_list()
    out = {}
    for msg in messages:
        is_sub = [subs.is_subscribed(v, msg.topic) for v in range(overlay.n)]
        blocked = blocked_of(msg.topic) if blocked_of is not None else None
        out[msg.id] = oracles.propagate_message(
            neighbor_map,
            is_sub,
            delays,
            processing,
            msg.publisher,
            msg.publish_time,
            msg.initial_ttl,
            blocked=blocked,
        )
    return out


def engine_firsts(trace) -> dict[int, dict[int, tuple[float, int]]]:
    """Trace first receipts regrouped as {msg_id: {receiver: (time, ttl)}}."""
    out: dict[int, dict[int, tuple[float, int]]] = {}
    for m, v, t, ttl in zip(
        trace.first_msg.tolist(),
        trace.first_node.tolist(),
        trace.first_time.tolist(),
        trace.first_ttl.tolist(),
    ):
        out.setdefault(m, {})[v] = (t, ttl)
    return out


def assert_matches_oracle(overlay, subs, lat, messages, behavior=None, blocked_of=None):
    trace = run_epoch(overlay, subs, lat, schedule_of(messages), behavior=behavior)
    reference = oracle_run(overlay, subs, lat, messages, blocked_of=blocked_of)
    got = engine_firsts(trace)
    for msg in messages:
        ref_firsts, ref_arrivals = reference[msg.id]
        assert got.get(msg.id, {}) == ref_firsts, f"message {msg.id} first receipts differ"
        mask = trace.arrival_msg == msg.id
        engine_arrivals = list(
            zip(
                trace.arrival_sender[mask].tolist(),
                trace.arrival_recv[mask].tolist(),
                trace.arrival_time[mask].tolist(),
            )
        )
        assert sorted(engine_arrivals) == sorted(ref_arrivals), (
            f"message {msg.id} arrival streams differ"
        )
    return trace, reference
