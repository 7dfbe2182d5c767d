"""Event-driven gossip over an overlay, with interest-scoped TTL relaying.

Relay semantics, applied uniformly at every node:

* A message carries a TTL value on the wire. On receipt, a node first
  records the arrival, then checks for duplicates (a previously seen
  message is never forwarded again). On first receipt the node decrements
  the TTL if and only if it is not subscribed to the message's topic, and
  then relays based on the post-decrement value: positive TTL goes to the
  full neighborhood except the sender, zero TTL goes only to subscribed
  neighbors except the sender. Zero-TTL messages are therefore never sent
  to unsubscribed nodes, so the wire TTL never drops below zero.
* The publisher's initial send follows the same rule over its whole
  neighborhood (publishers subscribe to their own topic, so no decrement).
* Every hop costs the sender's processing delay plus the link latency:
  a copy relayed at time t arrives at (t + processing[sender]) + latency.

Timestamps recorded for a neighbor are local arrival times; the earliest
arrival wins when duplicates race.
"""

from __future__ import annotations

import csv
import heapq
from collections import Counter
from dataclasses import dataclass, field
from random import Random
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError
from .netmodel import LatencyModel, OverlayGraph, SubscriptionTable


@dataclass(frozen=True)
class Message:
    id: int
    topic: int
    publisher: int
    publish_time: float
    initial_ttl: int


@dataclass(frozen=True)
class DeliveryEvent:
    message: int
    sender: int
    receiver: int
    arrival_time: float
    ttl_on_arrival: int


@dataclass
class MessageObservation:
    topic: Optional[int]
    first_time: float
    arrivals: dict[int, float]


@dataclass
class ObservationLog:
    """One node's per-message record of which neighbor delivered when."""

    owner: int
    messages: dict[int, MessageObservation] = field(default_factory=dict)

    def record(self, msg_id: int, sender: int, time: float, topic: Optional[int] = None) -> None:
        obs = self.messages.get(msg_id)
        if obs is None:
            self.messages[msg_id] = MessageObservation(
                topic=topic, first_time=time, arrivals={sender: time}
            )
            return
        if topic is not None:
            obs.topic = topic
        if time < obs.first_time:
            obs.first_time = time
        prev = obs.arrivals.get(sender)
        if prev is None or time < prev:
            obs.arrivals[sender] = time

    def normalized(self, msg_id: int) -> dict[int, float]:
        """Arrival timestamps shifted so the earliest neighbor reads zero."""
        obs = self.messages[msg_id]
        return {u: t - obs.first_time for u, t in obs.arrivals.items()}


def record_observation(log: ObservationLog, event: DeliveryEvent, topic: Optional[int] = None) -> ObservationLog:
    log.record(event.message, event.sender, event.arrival_time, topic)
    return log


def relay_decision(
    node: int,
    topic: int,
    ttl_after_receipt: int,
    sender: Optional[int],
    subs: SubscriptionTable,
    overlay: OverlayGraph,
    duplicate: bool = False,
) -> set[int]:
    """Targets for one relay step; empty for duplicates.

    ttl_after_receipt is the value after any unsubscribed-receiver decrement.
    """
    if duplicate:
        return set()
    neighbors = overlay.neighbors(node)
    if ttl_after_receipt > 0:
        targets = {u for u in neighbors if u != sender}
    else:
        targets = {u for u in neighbors if u != sender and subs.is_subscribed(u, topic)}
    return targets


@dataclass
class PublicationSchedule:
    """Messages of one epoch: topics round-robin, publishers drawn per message."""

    epoch: int
    messages: list[Message]
    published_by_topic: dict[int, int]


def make_schedule(
    subs: SubscriptionTable,
    epoch: int,
    num_messages: int,
    initial_ttl: int,
    epoch_start: float,
    round_interval: float,
    first_msg_id: int,
    rng: Random,
) -> PublicationSchedule:
    """Distribute num_messages round-robin across topics, one round per sweep.

    The publisher of each message is drawn uniformly from the subscribers of
    its topic, independently across messages.
    """
    if num_messages < 1:
        raise ConfigurationError(f"need at least one message per epoch, got {num_messages}")
    if initial_ttl < 0:
        raise ConfigurationError(f"initial TTL must be >= 0, got {initial_ttl}")
    num_topics = subs.num_topics
    messages = []
    for j in range(num_messages):
        topic = j % num_topics
        rnd = j // num_topics
        pool = subs.subscribers(topic)
        if not pool:
            raise ConfigurationError(f"topic {topic} has no subscriber to publish")
        publisher = pool[rng.randrange(len(pool))]
        messages.append(
            Message(
                id=first_msg_id + j,
                topic=topic,
                publisher=publisher,
                publish_time=epoch_start + rnd * round_interval,
                initial_ttl=initial_ttl,
            )
        )
    return PublicationSchedule(epoch, messages, dict(Counter(m.topic for m in messages)))


@dataclass(eq=False)
class EpochTrace:
    """Everything one epoch produced: first receipts, raw arrivals, metadata.

    first_* arrays hold one row per (message, receiver) first receipt, in
    processing order. arrival_* arrays (present when observation collection
    is enabled) hold one row per delivery attempt, duplicates included; they
    feed the per-node observation logs.
    """

    epoch: int
    n_nodes: int
    messages: list[Message]
    published_by_topic: dict[int, int]
    first_msg: np.ndarray
    first_node: np.ndarray
    first_time: np.ndarray
    first_ttl: np.ndarray
    arrival_msg: Optional[np.ndarray] = None
    arrival_sender: Optional[np.ndarray] = None
    arrival_recv: Optional[np.ndarray] = None
    arrival_time: Optional[np.ndarray] = None

    @property
    def has_observations(self) -> bool:
        return self.arrival_msg is not None

    def message_by_id(self, msg_id: int) -> Message:
        base = self.messages[0].id
        return self.messages[msg_id - base]

    def receivers(self, msg_id: int) -> set[int]:
        return set(self.first_node[self.first_msg == msg_id].tolist())

    def first_receipt(self, msg_id: int, node: int) -> Optional[float]:
        hit = (self.first_msg == msg_id) & (self.first_node == node)
        times = self.first_time[hit]
        return float(times[0]) if times.size else None

    def observation_log(self, node: int) -> ObservationLog:
        if not self.has_observations:
            raise ConfigurationError("trace was collected without observations")
        log = ObservationLog(owner=node)
        mask = self.arrival_recv == node
        for m, u, t in zip(
            self.arrival_msg[mask].tolist(),
            self.arrival_sender[mask].tolist(),
            self.arrival_time[mask].tolist(),
        ):
            log.record(m, u, t, topic=self.message_by_id(m).topic)
        return log

    def write_csv(self, path) -> None:
        """One row per first receipt, joined with message metadata."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(
                [
                    "msg_id",
                    "topic",
                    "publisher",
                    "publish_time",
                    "receiver",
                    "first_receipt_time",
                    "ttl_on_arrival",
                ]
            )
            for m, v, t, ttl in zip(
                self.first_msg.tolist(),
                self.first_node.tolist(),
                self.first_time.tolist(),
                self.first_ttl.tolist(),
            ):
                msg = self.message_by_id(m)
                w.writerow([m, msg.topic, msg.publisher, repr(msg.publish_time), v, repr(t), ttl])


def read_trace_csv(path) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append(
                {
                    "msg_id": int(row["msg_id"]),
                    "topic": int(row["topic"]),
                    "publisher": int(row["publisher"]),
                    "publish_time": float(row["publish_time"]),
                    "receiver": int(row["receiver"]),
                    "first_receipt_time": float(row["first_receipt_time"]),
                    "ttl_on_arrival": int(row["ttl_on_arrival"]),
                }
            )
    return rows


def run_epoch(
    overlay: OverlayGraph,
    subs: SubscriptionTable,
    lat: LatencyModel,
    schedule: PublicationSchedule,
    behavior=None,
    collect_observations: bool = True,
) -> EpochTrace:
    """Drain one epoch's publications to quiescence.

    Messages do not interact (no contention, per-message duplicate
    suppression), so each message's event queue is drained independently;
    the union of the per-message event streams equals a single global
    time-ordered queue. `behavior` may veto relaying per (node, topic)
    (see adversary.WithholdBehavior); vetoed nodes still receive, record
    and deduplicate, and still originate their own publications.
    """
    n = overlay.n
    if subs.n != n or lat.n != n:
        raise ConfigurationError("overlay, subscriptions and latency model disagree on n")
    lat_rows = lat.delay_lists()
    delta = lat.processing_list()
    gamma = overlay.neighbor_lists()

    # Relay target tables, rebuilt per epoch because the overlay changes.
    tgt_all: list[list[tuple[int, float]]] = []
    for v in range(n):
        row = lat_rows[v]
        tgt_all.append([(u, row[u]) for u in gamma[v]])

    sub_mat = subs.matrix()
    topics_used = sorted({m.topic for m in schedule.messages})
    int_flags: dict[int, bytearray] = {}
    tgt_int: dict[int, list[list[tuple[int, float]]]] = {}
    blocked_by_topic: dict[int, Optional[bytearray]] = {}
    for topic in topics_used:
        flags = bytearray(np.ascontiguousarray(sub_mat[:, topic]).tobytes())
        int_flags[topic] = flags
        tgt_int[topic] = [
            [(u, lat_rows[v][u]) for u in gamma[v] if flags[u]] for v in range(n)
        ]
        blocked_by_topic[topic] = behavior.blocked_bytes(topic, n) if behavior is not None else None

    arrivals: Optional[list[tuple[int, int, int, float]]] = [] if collect_observations else None
    firsts_m: list[int] = []
    firsts_v: list[int] = []
    firsts_t: list[float] = []
    firsts_ttl: list[int] = []

    heappush = heapq.heappush
    heappop = heapq.heappop

    for msg in schedule.messages:
        topic = msg.topic
        pub = msg.publisher
        ttl0 = msg.initial_ttl
        flags = int_flags[topic]
        tint = tgt_int[topic]
        blocked = blocked_by_topic[topic]
        mid = msg.id
        seen = bytearray(n)
        seen[pub] = 1
        depart = msg.publish_time + delta[pub]
        seq = 0
        heap: list[tuple[float, int, int, int, int]] = []
        for u, lw in (tgt_all[pub] if ttl0 > 0 else tint[pub]):
            heap.append((depart + lw, seq, pub, u, ttl0))
            seq += 1
        heapq.heapify(heap)
        while heap:
            t, _, snd, v, ttl_wire = heappop(heap)
            if arrivals is not None:
                arrivals.append((mid, snd, v, t))
            if seen[v]:
                continue
            seen[v] = 1
            firsts_m.append(mid)
            firsts_v.append(v)
            firsts_t.append(t)
            firsts_ttl.append(ttl_wire)
            ttl_out = ttl_wire if flags[v] else ttl_wire - 1
            if blocked is not None and blocked[v]:
                continue
            depart = t + delta[v]
            for u, lw in (tgt_all[v] if ttl_out > 0 else tint[v]):
                if u != snd:
                    heappush(heap, (depart + lw, seq, v, u, ttl_out))
                    seq += 1

    trace = EpochTrace(
        epoch=schedule.epoch,
        n_nodes=n,
        messages=schedule.messages,
        published_by_topic=dict(schedule.published_by_topic),
        first_msg=np.array(firsts_m, dtype=np.int64),
        first_node=np.array(firsts_v, dtype=np.int64),
        first_time=np.array(firsts_t, dtype=np.float64),
        first_ttl=np.array(firsts_ttl, dtype=np.int64),
    )
    if arrivals is not None:
        if arrivals:
            am, asnd, arecv, at = zip(*arrivals)
        else:
            am = asnd = arecv = at = ()
        trace.arrival_msg = np.array(am, dtype=np.int64)
        trace.arrival_sender = np.array(asnd, dtype=np.int64)
        trace.arrival_recv = np.array(arecv, dtype=np.int64)
        trace.arrival_time = np.array(at, dtype=np.float64)
    return trace
