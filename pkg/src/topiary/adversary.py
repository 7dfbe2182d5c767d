"""Attacker models layered onto a run without touching the honest code paths.

Two behaviors are modeled. Topic withholding: attackers subscribe to a victim
topic, receive and record its messages, but never relay them (other topics are
forwarded normally, and attackers still publish). Eclipse: a fully connected
attacker cohort that otherwise forwards honestly, instrumented by the share of
honest nodes' outgoing edges captured by attackers.

With zero attackers every helper degrades to a no-op, so an attack-free run
and a null-attack run produce identical traces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import ConfigurationError
from .netmodel import OverlayGraph, SubscriptionTable

ATTACK_KINDS = ("topic-withhold", "eclipse")


@dataclass(frozen=True)
class AttackConfig:
    kind: str
    attacker_count: int
    victim_topic: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ConfigurationError(f"unknown attack kind {self.kind!r}, expected one of {ATTACK_KINDS}")
        if self.attacker_count < 0:
            raise ConfigurationError(f"attacker_count must be >= 0, got {self.attacker_count}")
        if self.kind == "topic-withhold" and self.victim_topic is None:
            raise ConfigurationError("topic-withhold requires a victim_topic")
        if self.victim_topic is not None and self.victim_topic < 0:
            raise ConfigurationError(f"victim_topic must be >= 0, got {self.victim_topic}")


def attacker_ids(n: int, count: int) -> tuple[int, ...]:
    """The attacker cohort occupies the highest node ids."""
    if count >= n:
        raise ConfigurationError(f"attacker_count {count} must be < n = {n}")
    return tuple(range(n - count, n))


class WithholdBehavior:
    """Relay veto for one topic: listed nodes receive but never forward it."""

    def __init__(self, attackers: Iterable[int], victim_topic: int, n: int):
        self.victim_topic = victim_topic
        self.n = n
        flags = bytearray(n)
        for a in attackers:
            if not 0 <= a < n:
                raise ConfigurationError(f"attacker id {a} out of range for n = {n}")
            flags[a] = 1
        self._flags = flags
        self.attackers = tuple(i for i in range(n) if flags[i])

    def blocked_bytes(self, topic: int, n: int) -> Optional[bytearray]:
        if n != self.n:
            raise ConfigurationError(f"behavior built for n = {self.n}, asked about n = {n}")
        if topic != self.victim_topic or not self.attackers:
            return None
        return self._flags


def apply_topic_withhold(
    subs: SubscriptionTable,
    attackers: Iterable[int],
    victim_topic: int,
) -> tuple[SubscriptionTable, WithholdBehavior]:
    """Force the attackers' victim-topic subscription and build their veto."""
    attackers = tuple(sorted(set(attackers)))
    if not 0 <= victim_topic < subs.num_topics:
        raise ConfigurationError(f"victim_topic {victim_topic} not in [0, {subs.num_topics})")
    forced = subs.with_forced(attackers, victim_topic)
    return forced, WithholdBehavior(attackers, victim_topic, subs.n)


def apply_eclipse(overlay: OverlayGraph, attackers: Iterable[int]) -> OverlayGraph:
    """Add the attacker-to-attacker clique as bound-exempt extra edges.

    Attackers keep their protocol-managed outgoing slots; the clique rides
    alongside them, so honest degree accounting is untouched.
    """
    attackers = tuple(sorted(set(attackers)))
    for a in attackers:
        if not 0 <= a < overlay.n:
            raise ConfigurationError(f"attacker id {a} out of range for n = {overlay.n}")
    if len(attackers) > overlay.n - overlay.degree_bound - 1:
        raise ConfigurationError(
            f"{len(attackers)} attackers leave fewer than degree_bound + 1 honest nodes"
        )
    clique = [(a, b) for i, a in enumerate(attackers) for b in attackers[i + 1 :]]
    extras = sorted(set(overlay.extra_edges) | set(clique))
    return OverlayGraph(
        overlay.n,
        overlay.outgoing,
        overlay.degree_bound,
        enforce_bound=overlay.enforce_bound,
        extra_edges=tuple(extras),
    )


def attacker_outgoing_fraction(
    overlay: OverlayGraph,
    attackers: Iterable[int],
    nodes: Optional[Iterable[int]] = None,
) -> float:
    """Share of the given honest nodes' outgoing edges that point at attackers.

    Defaults to all non-attacker nodes. Bound-exempt extra edges are ignored;
    only protocol-managed slots count. Returns 0.0 when the nodes have no
    outgoing edges at all.
    """
    attacker_set = frozenset(attackers)
    if nodes is None:
        pool: Sequence[int] = [v for v in range(overlay.n) if v not in attacker_set]
    else:
        pool = [v for v in nodes if v not in attacker_set]
    edges = 0
    captured = 0
    for v in pool:
        for u in overlay.outgoing[v]:
            edges += 1
            if u in attacker_set:
                captured += 1
    if edges == 0:
        return 0.0
    return captured / edges


def per_node_attacker_fraction(overlay: OverlayGraph, attackers: Iterable[int]) -> dict[int, float]:
    """Per honest node: fraction of its outgoing slots held by attackers."""
    attacker_set = frozenset(attackers)
    out: dict[int, float] = {}
    for v in range(overlay.n):
        if v in attacker_set:
            continue
        slots = overlay.outgoing[v]
        if not slots:
            out[v] = 0.0
            continue
        out[v] = sum(1 for u in slots if u in attacker_set) / len(slots)
    return out


def eviction_curve(
    overlays: Sequence[OverlayGraph],
    attackers: Iterable[int],
    nodes: Optional[Iterable[int]] = None,
) -> list[float]:
    """Attacker capture share per epoch, over the given honest nodes."""
    attacker_tuple = tuple(attackers)
    node_tuple = None if nodes is None else tuple(nodes)
    return [attacker_outgoing_fraction(g, attacker_tuple, node_tuple) for g in overlays]
