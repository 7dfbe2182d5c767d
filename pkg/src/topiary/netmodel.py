"""Static network description: nodes, topics, subscriptions, latencies, overlays.

Nodes and topics are dense integer ids (0..n-1, 0..num_topics-1). Latency
units are abstract: the unit-square model uses raw Euclidean distance between
random points (about 100 ms per unit if a physical reading is wanted), while
matrix ingestion produces one-way millisecond delays halved from round-trip
pings. Per-node processing delays default to roughly 1% of a typical link in
either mode and are always strictly positive.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from random import Random
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, IngestionError

# Default per-node processing delay ranges, in the latency units of each mode.
UNIT_SQUARE_PROCESSING = (0.005, 0.015)
MATRIX_PROCESSING = (0.5, 1.5)


@dataclass(eq=False)
class SubscriptionTable:
    """Per-node topic interest sets over a dense topic universe.

    Invariants: every node subscribes to at least one topic and every topic
    has at least one subscriber. Construction enforces both by bounded
    resampling (see build_subscriptions); resample_rounds records how many
    repair rounds were needed.
    """

    num_topics: int
    topics_of: tuple[frozenset[int], ...]
    resample_rounds: int = 0
    _by_topic: Optional[tuple[tuple[int, ...], ...]] = field(default=None, repr=False)
    _matrix: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.topics_of)

    def subscribers(self, topic: int) -> tuple[int, ...]:
        if self._by_topic is None:
            buckets: list[list[int]] = [[] for _ in range(self.num_topics)]
            for v, topics in enumerate(self.topics_of):
                for t in topics:
                    buckets[t].append(v)
            self._by_topic = tuple(tuple(sorted(b)) for b in buckets)
        return self._by_topic[topic]

    def is_subscribed(self, node: int, topic: int) -> bool:
        return topic in self.topics_of[node]

    def matrix(self) -> np.ndarray:
        """Boolean (n, num_topics) membership matrix."""
        if self._matrix is None:
            m = np.zeros((self.n, self.num_topics), dtype=bool)
            for v, topics in enumerate(self.topics_of):
                if topics:
                    m[v, sorted(topics)] = True
            self._matrix = m
        return self._matrix

    def validate(self) -> None:
        for v, topics in enumerate(self.topics_of):
            if not topics:
                raise ConfigurationError(f"node {v} subscribes to no topic")
            bad = [t for t in topics if not 0 <= t < self.num_topics]
            if bad:
                raise ConfigurationError(f"node {v} subscribes to unknown topics {sorted(bad)}")
        for t in range(self.num_topics):
            if not self.subscribers(t):
                raise ConfigurationError(f"topic {t} has no subscriber")

    def with_forced(self, nodes: Iterable[int], topic: int) -> "SubscriptionTable":
        """Copy with `topic` added to every node in `nodes` (attack staging)."""
        if not 0 <= topic < self.num_topics:
            raise ConfigurationError(f"topic {topic} out of range")
        forced = set(nodes)
        rows = tuple(
            frozenset(s | {topic}) if v in forced else s for v, s in enumerate(self.topics_of)
        )
        return SubscriptionTable(self.num_topics, rows, self.resample_rounds)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["node_id", "topic_id"])
            for v, topics in enumerate(self.topics_of):
                for t in sorted(topics):
                    w.writerow([v, t])


def build_subscriptions(
    n: int,
    num_topics: int,
    interest_rate: float,
    rng: Random,
    max_fix_rounds: int = 100,
) -> SubscriptionTable:
    """Draw each (node, topic) membership independently with the given rate.

    Empty rows and empty topic columns are repaired by redrawing only the
    offending row or column; the repair loop is bounded and a failure to
    satisfy both invariants raises ConfigurationError.
    """
    if n < 1:
        raise ConfigurationError(f"need at least one node, got n={n}")
    if num_topics < 1:
        raise ConfigurationError(f"need at least one topic, got num_topics={num_topics}")
    if not 0.0 < interest_rate <= 1.0:
        raise ConfigurationError(f"interest_rate must be in (0, 1], got {interest_rate}")

    rows: list[set[int]] = [
        {t for t in range(num_topics) if rng.random() < interest_rate} for _ in range(n)
    ]

    rounds = 0
    while True:
        empty_rows = [v for v in range(n) if not rows[v]]
        covered = set()
        for r in rows:
            covered |= r
        empty_cols = [t for t in range(num_topics) if t not in covered]
        if not empty_rows and not empty_cols:
            break
        rounds += 1
        if rounds > max_fix_rounds:
            raise ConfigurationError(
                f"subscription invariants unsatisfied after {max_fix_rounds} resample rounds "
                f"(n={n}, num_topics={num_topics}, interest_rate={interest_rate})"
            )
        for v in empty_rows:
            rows[v] = {t for t in range(num_topics) if rng.random() < interest_rate}
        for t in empty_cols:
            for v in range(n):
                if rng.random() < interest_rate:
                    rows[v].add(t)
                else:
                    rows[v].discard(t)

    return SubscriptionTable(num_topics, tuple(frozenset(r) for r in rows), rounds)


@dataclass(eq=False)
class LatencyModel:
    """Symmetric one-way link delays plus per-node processing delays.

    delays[u, v] is defined for every pair (the overlay decides which links
    carry traffic); the diagonal is zero and processing delays are > 0.
    """

    delays: np.ndarray
    processing: np.ndarray
    positions: Optional[np.ndarray] = None
    labels: Optional[tuple[str, ...]] = None
    _delay_lists: Optional[list[list[float]]] = field(default=None, repr=False)
    _processing_list: Optional[list[float]] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return int(self.delays.shape[0])

    def latency(self, u: int, v: int) -> float:
        return float(self.delays[u, v])

    def delay_lists(self) -> list[list[float]]:
        if self._delay_lists is None:
            self._delay_lists = self.delays.tolist()
        return self._delay_lists

    def processing_list(self) -> list[float]:
        if self._processing_list is None:
            self._processing_list = self.processing.tolist()
        return self._processing_list

    def quantile_delay(self, q: float) -> float:
        off = self.delays[~np.eye(self.n, dtype=bool)]
        return float(np.quantile(off, q))

    def validate(self) -> None:
        d = self.delays
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ConfigurationError(f"delay matrix must be square, got shape {d.shape}")
        if np.any(d < 0):
            raise ConfigurationError("negative link delay")
        if np.any(np.diag(d) != 0):
            raise ConfigurationError("nonzero self-delay")
        if not np.array_equal(d, d.T):
            raise ConfigurationError("asymmetric delay matrix")
        if self.processing.shape != (self.n,) or np.any(self.processing <= 0):
            raise ConfigurationError("processing delays must be strictly positive, one per node")


def _draw_processing(n: int, rng: Optional[Random], rng_range: tuple[float, float]) -> np.ndarray:
    lo, hi = rng_range
    if not 0 < lo <= hi:
        raise ConfigurationError(f"processing delay range must satisfy 0 < lo <= hi, got {rng_range}")
    if rng is None:
        return np.full(n, (lo + hi) / 2.0)
    return np.array([rng.uniform(lo, hi) for _ in range(n)])


def unit_square_latency(
    n: int,
    rng: Random,
    processing_range: tuple[float, float] = UNIT_SQUARE_PROCESSING,
) -> LatencyModel:
    """Place n nodes uniformly in the unit square; link delay = Euclidean distance."""
    if n < 2:
        raise ConfigurationError(f"need at least two nodes, got n={n}")
    pos = np.array([[rng.random(), rng.random()] for _ in range(n)])
    diff = pos[:, None, :] - pos[None, :, :]
    delays = np.sqrt((diff * diff).sum(axis=2))
    np.fill_diagonal(delays, 0.0)
    processing = _draw_processing(n, rng, processing_range)
    return LatencyModel(delays=delays, processing=processing, positions=pos)


def load_latency_matrix(
    path,
    rng: Optional[Random] = None,
    processing_range: tuple[float, float] = MATRIX_PROCESSING,
) -> LatencyModel:
    """Ingest a round-trip ping matrix CSV into one-way link delays.

    Schema: first row holds n node labels; each following row holds a label
    plus n ping cells in milliseconds. One-way delay is ping/2; asymmetric
    entries are reconciled by averaging the two directions; the diagonal is
    forced to zero. Malformed input raises IngestionError naming the
    offending row and column.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError("empty latency matrix file") from None
        labels = tuple(cell.strip() for cell in header if cell.strip())
        n = len(labels)
        if n < 2:
            raise IngestionError(f"matrix header lists {n} nodes, need at least 2")
        ping = np.zeros((n, n))
        row_count = 0
        for i, row in enumerate(reader):
            if not row or all(not c.strip() for c in row):
                continue
            if i >= n:
                raise IngestionError(f"more data rows than the {n} header labels")
            if len(row) != n + 1:
                raise IngestionError(
                    f"row {labels[i] if i < n else i}: expected label plus {n} cells, got {len(row)}"
                )
            row_label = row[0].strip()
            for j, cell in enumerate(row[1:]):
                try:
                    value = float(cell)
                except ValueError:
                    raise IngestionError(
                        f"row {row_label}, column {labels[j]}: unparseable cell {cell!r}"
                    ) from None
                if value < 0:
                    raise IngestionError(
                        f"row {row_label}, column {labels[j]}: negative ping {value}"
                    )
                ping[i, j] = value
            row_count += 1
        if row_count != n:
            raise IngestionError(f"matrix has {row_count} data rows but {n} header labels")

    one_way = ping / 2.0
    delays = (one_way + one_way.T) / 2.0
    np.fill_diagonal(delays, 0.0)
    processing = _draw_processing(n, rng, processing_range)
    return LatencyModel(delays=delays, processing=processing, labels=labels)


class OverlayGraph:
    """Directed out-neighbor lists plus the derived bidirectional link view.

    An established link carries traffic both ways: the effective neighborhood
    of v is outgoing(v) union incoming(v), union any extra undirected edges
    (used for attack cohorts, not counted against the degree bound).
    """

    __slots__ = ("n", "degree_bound", "enforce_bound", "outgoing", "extra_edges", "_neighbors")

    def __init__(
        self,
        n: int,
        outgoing: Sequence[Sequence[int]],
        degree_bound: int,
        enforce_bound: bool = True,
        extra_edges: Iterable[tuple[int, int]] = (),
    ):
        if len(outgoing) != n:
            raise ConfigurationError(f"expected {n} outgoing lists, got {len(outgoing)}")
        cleaned = []
        for v, targets in enumerate(outgoing):
            targets = tuple(int(u) for u in targets)
            if any(u == v for u in targets):
                raise ConfigurationError(f"node {v} links to itself")
            if any(not 0 <= u < n for u in targets):
                raise ConfigurationError(f"node {v} links outside the node range")
            if len(set(targets)) != len(targets):
                raise ConfigurationError(f"node {v} has duplicate outgoing links")
            if enforce_bound and len(targets) > degree_bound:
                raise ConfigurationError(
                    f"node {v} has {len(targets)} outgoing links, bound is {degree_bound}"
                )
            cleaned.append(targets)
        extras = []
        for a, b in extra_edges:
            a, b = int(a), int(b)
            if a == b:
                raise ConfigurationError("extra edge links a node to itself")
            if not (0 <= a < n and 0 <= b < n):
                raise ConfigurationError("extra edge outside the node range")
            extras.append((min(a, b), max(a, b)))
        self.n = n
        self.degree_bound = degree_bound
        self.enforce_bound = enforce_bound
        self.outgoing = tuple(cleaned)
        self.extra_edges = tuple(sorted(set(extras)))
        self._neighbors: Optional[list[list[int]]] = None

    def outgoing_of(self, v: int) -> tuple[int, ...]:
        return self.outgoing[v]

    def neighbor_lists(self) -> list[list[int]]:
        """Sorted effective neighborhoods for every node."""
        if self._neighbors is None:
            sets: list[set[int]] = [set(t) for t in self.outgoing]
            for v, targets in enumerate(self.outgoing):
                for u in targets:
                    sets[u].add(v)
            for a, b in self.extra_edges:
                sets[a].add(b)
                sets[b].add(a)
            self._neighbors = [sorted(s) for s in sets]
        return self._neighbors

    def neighbors(self, v: int) -> list[int]:
        return self.neighbor_lists()[v]

    def incoming_of(self, v: int) -> tuple[int, ...]:
        return tuple(u for u in range(self.n) if v in self.outgoing[u])

    def outgoing_edges(self) -> Iterator[tuple[int, int]]:
        for v, targets in enumerate(self.outgoing):
            for u in targets:
                yield v, u

    def replace_outgoing(self, new_outgoing: Sequence[Sequence[int]]) -> "OverlayGraph":
        return OverlayGraph(
            self.n, new_outgoing, self.degree_bound, self.enforce_bound, self.extra_edges
        )

    def write_csv(self, path, epoch: int) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epoch", "src", "dst"])
            for src, dst in self.outgoing_edges():
                w.writerow([epoch, src, dst])


def random_overlay(n: int, degree: int, rng: Random) -> OverlayGraph:
    """Each node picks `degree` distinct outgoing neighbors uniformly."""
    if degree < 1:
        raise ConfigurationError(f"degree must be >= 1, got {degree}")
    if degree >= n:
        raise ConfigurationError(f"degree {degree} needs at least {degree + 1} nodes, got {n}")
    outgoing = []
    for v in range(n):
        others = [u for u in range(n) if u != v]
        outgoing.append(tuple(sorted(rng.sample(others, degree))))
    return OverlayGraph(n, outgoing, degree)


def complete_overlay(n: int) -> OverlayGraph:
    """All-pairs overlay; the degree bound is not enforced for this baseline."""
    if n < 2:
        raise ConfigurationError(f"need at least two nodes, got n={n}")
    outgoing = [tuple(u for u in range(n) if u != v) for v in range(n)]
    return OverlayGraph(n, outgoing, n - 1, enforce_bound=False)
