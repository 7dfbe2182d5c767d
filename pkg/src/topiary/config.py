"""Experiment configuration: dataclasses, JSON round-trip, validation, presets.

Configs are plain nested dataclasses serialized as JSON. validate_config
returns a list of human-readable violations instead of raising, so the CLI
can report all problems at once before any simulation starts.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .adversary import AttackConfig
from .errors import ConfigurationError
from .protocols import PolicyConfig

NETWORK_KINDS = ("unit-square", "matrix")


@dataclass(frozen=True)
class NetworkConfig:
    kind: str = "unit-square"
    n: int = 200
    matrix_path: Optional[str] = None
    round_interval: Optional[float] = None

    def __post_init__(self):
        if self.kind not in NETWORK_KINDS:
            raise ConfigurationError(f"unknown network kind {self.kind!r}, expected one of {NETWORK_KINDS}")


@dataclass(frozen=True)
class ExperimentConfig:
    network: NetworkConfig = field(default_factory=NetworkConfig)
    degree: int = 6
    switch_count: int = 2
    num_topics: int = 20
    interest_rate: float = 0.4
    messages_per_epoch: int = 200
    num_epochs: int = 60
    initial_ttl: int = 1
    coverage_weight: float = 1.0
    delay_weight: float = 3000.0
    wastage_weight: float = 0.0
    explore_threshold: float = 2.0
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    attack: Optional[AttackConfig] = None
    seeds: tuple[int, ...] = (1,)
    out_dir: str = "runs/out"
    overlay_snapshot_every: int = 10

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["seeds"] = list(self.seeds)
        return d


def config_from_dict(data: Mapping) -> ExperimentConfig:
    """Build a config from a (possibly partial) nested mapping."""
    data = dict(data)
    unknown = set(data) - {f.name for f in dataclasses.fields(ExperimentConfig)}
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    if "network" in data and data["network"] is not None:
        data["network"] = NetworkConfig(**dict(data["network"]))
    if "policy" in data and data["policy"] is not None:
        data["policy"] = PolicyConfig(**dict(data["policy"]))
    if "attack" in data and data["attack"] is not None:
        data["attack"] = AttackConfig(**dict(data["attack"]))
    if "seeds" in data and data["seeds"] is not None:
        seeds = data["seeds"]
        if isinstance(seeds, int):
            seeds = [seeds]
        data["seeds"] = tuple(int(s) for s in seeds)
    return ExperimentConfig(**data)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path} must hold a JSON object")
    return config_from_dict(data)


def save_config(config: ExperimentConfig, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def apply_overrides(config: ExperimentConfig, overrides: Sequence[str]) -> ExperimentConfig:
    """Apply key=value strings with dotted paths into nested sections.

    Values parse as JSON when possible, else stay strings, so
    network.n=500 and network.matrix_path=data/pings.csv both work.
    """
    data = config.to_dict()
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not key=value")
        key, _, raw = item.partition("=")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        target = data
        parts = key.split(".")
        for part in parts[:-1]:
            nxt = target.get(part)
            if not isinstance(nxt, dict):
                if part in ("network", "policy", "attack") and nxt is None:
                    nxt = {}
                    target[part] = nxt
                else:
                    raise ConfigurationError(f"override key {key!r} does not name a config field")
            target = nxt
        if parts[-1] not in target and parts[0] not in ("network", "policy", "attack"):
            raise ConfigurationError(f"override key {key!r} does not name a config field")
        target[parts[-1]] = value
    return config_from_dict(data)


def validate_config(config: ExperimentConfig) -> list[str]:
    """Every cross-field check, reported together; empty list means valid."""
    v: list[str] = []
    net = config.network
    if net.kind == "unit-square":
        if net.n < 2:
            v.append(f"unit-square network needs n >= 2, got {net.n}")
        if config.degree >= net.n:
            v.append(f"degree {config.degree} must be < n = {net.n}")
    else:
        if not net.matrix_path:
            v.append("matrix network needs matrix_path")
        elif not os.path.exists(net.matrix_path):
            v.append(f"latency matrix file not found: {net.matrix_path}")
    if net.round_interval is not None and net.round_interval <= 0:
        v.append(f"round_interval must be positive, got {net.round_interval}")
    if config.degree < 1:
        v.append(f"degree must be >= 1, got {config.degree}")
    if not 0 <= config.switch_count < config.degree:
        v.append(f"switch_count must be in [0, degree), got {config.switch_count} with degree {config.degree}")
    if config.num_topics < 1:
        v.append(f"num_topics must be >= 1, got {config.num_topics}")
    if not 0.0 < config.interest_rate <= 1.0:
        v.append(f"interest_rate must be in (0, 1], got {config.interest_rate}")
    if config.messages_per_epoch < 1:
        v.append(f"messages_per_epoch must be >= 1, got {config.messages_per_epoch}")
    if config.num_epochs < 1:
        v.append(f"num_epochs must be >= 1, got {config.num_epochs}")
    if config.initial_ttl < 0:
        v.append(f"initial_ttl must be >= 0, got {config.initial_ttl}")
    for name in ("coverage_weight", "delay_weight", "wastage_weight"):
        if getattr(config, name) < 0:
            v.append(f"{name} must be >= 0, got {getattr(config, name)}")
    if config.coverage_weight == config.delay_weight == config.wastage_weight == 0:
        v.append("at least one score weight must be positive")
    if config.explore_threshold <= 1.0:
        v.append(f"explore_threshold must exceed 1, got {config.explore_threshold}")
    if not config.seeds:
        v.append("seeds must not be empty")
    if config.overlay_snapshot_every < 0:
        v.append(f"overlay_snapshot_every must be >= 0, got {config.overlay_snapshot_every}")
    if config.attack is not None:
        a = config.attack
        if net.kind == "unit-square" and a.attacker_count >= net.n:
            v.append(f"attacker_count {a.attacker_count} must be < n = {net.n}")
        if a.kind == "topic-withhold" and a.victim_topic is not None and a.victim_topic >= config.num_topics:
            v.append(f"victim_topic {a.victim_topic} must be < num_topics = {config.num_topics}")
        if a.kind == "eclipse" and net.kind == "unit-square" and net.n - a.attacker_count <= config.degree:
            v.append(
                f"eclipse with {a.attacker_count} attackers leaves fewer than degree + 1 honest nodes"
            )
    return v


def _preset(**kwargs) -> ExperimentConfig:
    return config_from_dict(kwargs)


PRESETS: dict[str, ExperimentConfig] = {
    "unit-square-1000": _preset(
        network={"kind": "unit-square", "n": 1000},
        degree=6,
        switch_count=2,
        num_topics=100,
        interest_rate=0.4,
        messages_per_epoch=1000,
        num_epochs=150,
        out_dir="runs/unit-square-1000",
    ),
    "wondernetwork-246": _preset(
        network={"kind": "matrix", "matrix_path": "data/wondernetwork_pings.csv"},
        degree=5,
        switch_count=2,
        num_topics=100,
        interest_rate=0.4,
        messages_per_epoch=1000,
        num_epochs=150,
        out_dir="runs/wondernetwork-246",
    ),
    "topic-attack-300": _preset(
        network={"kind": "unit-square", "n": 1000},
        degree=6,
        switch_count=2,
        num_topics=100,
        interest_rate=0.4,
        messages_per_epoch=1000,
        num_epochs=150,
        attack={"kind": "topic-withhold", "attacker_count": 300, "victim_topic": 0},
        out_dir="runs/topic-attack-300",
    ),
    "eclipse-300": _preset(
        network={"kind": "unit-square", "n": 1000},
        degree=6,
        switch_count=2,
        num_topics=100,
        interest_rate=0.4,
        messages_per_epoch=1000,
        num_epochs=150,
        attack={"kind": "eclipse", "attacker_count": 300},
        out_dir="runs/eclipse-300",
    ),
    "desk-scale-200": _preset(
        network={"kind": "unit-square", "n": 200},
        degree=6,
        switch_count=2,
        num_topics=20,
        interest_rate=0.4,
        messages_per_epoch=200,
        num_epochs=60,
        seeds=[1, 2, 3],
        out_dir="runs/desk-scale-200",
    ),
}


def resolve_config(source: str) -> ExperimentConfig:
    """A config path, or preset:NAME for a bundled preset."""
    if source.startswith("preset:"):
        name = source.split(":", 1)[1]
        if name not in PRESETS:
            raise ConfigurationError(f"unknown preset {name!r}, available: {sorted(PRESETS)}")
        return PRESETS[name]
    if not os.path.exists(source):
        raise ConfigurationError(f"config file not found: {source}")
    return load_config(source)
