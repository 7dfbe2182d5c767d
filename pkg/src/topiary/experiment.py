"""Seeded end-to-end runs: build a network, loop epochs, emit CSV artifacts.

Each seed is fully independent: every random draw comes from a stream keyed
by (seed, purpose, ...), so per-seed outputs are identical whether seeds run
serially or in parallel processes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .adversary import (
    WithholdBehavior,
    apply_eclipse,
    apply_topic_withhold,
    attacker_ids,
    attacker_outgoing_fraction,
)
from .config import ExperimentConfig, validate_config
from .errors import ConfigurationError
from .gossip import EpochTrace, make_schedule, run_epoch
from .metrics import (
    EpochReport,
    build_report,
    metrics_rows,
    read_metrics_csv,
    summarize_seed_metrics,
    write_attack_metrics,
    write_manifest,
    write_reports,
    write_summary,
)
from .netmodel import (
    LatencyModel,
    OverlayGraph,
    SubscriptionTable,
    build_subscriptions,
    load_latency_matrix,
    unit_square_latency,
)
from .protocols import initial_overlay, update_all
from .rng import derive_rng
from .scoring import ScoreWeights, build_epoch_observations


class StageFailure(RuntimeError):
    """A seed run failed; carries the pipeline stage for diagnostics."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(eq=False)
class RunResult:
    """Everything one seed produced, kept in memory for tests and summaries."""

    seed: int
    config: ExperimentConfig
    reports: list[EpochReport]
    overlays: list[OverlayGraph]
    attack_rows: list[tuple[int, Optional[float], Optional[float], float]]
    attackers: tuple[int, ...]
    out_dir: Optional[str]
    traces: list[EpochTrace] = field(default_factory=list)


def _weights(config: ExperimentConfig) -> ScoreWeights:
    return ScoreWeights(
        coverage_weight=config.coverage_weight,
        delay_weight=config.delay_weight,
        wastage_weight=config.wastage_weight,
        explore_threshold=config.explore_threshold,
        keep_count=config.degree - config.switch_count,
        switch_count=config.switch_count,
    )


def build_network(
    config: ExperimentConfig, seed: int
) -> tuple[SubscriptionTable, LatencyModel, OverlayGraph, Optional[WithholdBehavior], tuple[int, ...]]:
    """Subscriptions, latencies, initial overlay and any attack staging."""
    net = config.network
    if net.kind == "unit-square":
        lat = unit_square_latency(net.n, derive_rng(seed, "latency"))
    else:
        if not net.matrix_path:
            raise ConfigurationError("matrix network needs matrix_path")
        lat = load_latency_matrix(net.matrix_path, derive_rng(seed, "latency"))
    n = lat.n
    if config.degree >= n:
        raise ConfigurationError(f"degree {config.degree} must be < n = {n}")
    subs = build_subscriptions_for(config, n, seed)

    behavior: Optional[WithholdBehavior] = None
    attackers: tuple[int, ...] = ()
    if config.attack is not None:
        attackers = attacker_ids(n, config.attack.attacker_count)
        if config.attack.kind == "topic-withhold":
            if config.attack.victim_topic is None:
                raise ConfigurationError("topic-withhold requires a victim_topic")
            subs, behavior = apply_topic_withhold(subs, attackers, config.attack.victim_topic)

    overlay = initial_overlay(config.policy, n, config.degree, subs, derive_rng(seed, "overlay"))
    if config.attack is not None and config.attack.kind == "eclipse":
        overlay = apply_eclipse(overlay, attackers)
    return subs, lat, overlay, behavior, attackers


def build_subscriptions_for(config: ExperimentConfig, n: int, seed: int) -> SubscriptionTable:
    return build_subscriptions(n, config.num_topics, config.interest_rate, derive_rng(seed, "subs"))


def _round_interval(config: ExperimentConfig, lat: LatencyModel) -> float:
    if config.network.round_interval is not None:
        return config.network.round_interval
    auto = 10.0 * lat.quantile_delay(0.99)
    return auto if auto > 0 else 1.0


def run_seed(
    config: ExperimentConfig,
    seed: int,
    write_outputs: bool = True,
    keep_traces: bool = False,
) -> RunResult:
    """One full seeded run; raises StageFailure naming the failing stage."""
    stage = "config-validate"
    try:
        problems = validate_config(config)
        if problems:
            raise ConfigurationError("; ".join(problems))

        stage = "network-build"
        subs, lat, overlay, behavior, attackers = build_network(config, seed)
        weights = _weights(config)
        interval = _round_interval(config, lat)
        rounds_per_epoch = math.ceil(config.messages_per_epoch / config.num_topics)
        epoch_span = rounds_per_epoch * interval
        adaptive = config.policy.adaptive

        honest_victims: Optional[tuple[int, ...]] = None
        if config.attack is not None and config.attack.kind == "topic-withhold":
            assert config.attack.victim_topic is not None
            attacker_set = set(attackers)
            honest_victims = tuple(
                v for v in subs.subscribers(config.attack.victim_topic) if v not in attacker_set
            )

        reports: list[EpochReport] = []
        overlays: list[OverlayGraph] = []
        attack_rows: list[tuple[int, Optional[float], Optional[float], float]] = []
        traces: list[EpochTrace] = []

        for epoch in range(config.num_epochs):
            overlays.append(overlay)

            stage = "schedule"
            schedule = make_schedule(
                subs,
                epoch,
                config.messages_per_epoch,
                config.initial_ttl,
                epoch_start=epoch * epoch_span,
                round_interval=interval,
                first_msg_id=epoch * config.messages_per_epoch,
                rng=derive_rng(seed, "schedule", epoch),
            )

            stage = "gossip"
            trace = run_epoch(
                overlay, subs, lat, schedule, behavior=behavior, collect_observations=adaptive
            )
            if keep_traces:
                traces.append(trace)

            stage = "metrics"
            retained_totals: Optional[list[float]] = None
            if adaptive:
                stage = "scoring"
                observations = build_epoch_observations(trace, overlay, subs)
                stage = "policy-update"
                overlay, retained, _plans = update_all(
                    overlay, observations, subs, weights, seed, epoch
                )
                retained_totals = [s.total for s in retained]
            stage = "metrics"
            report = build_report(trace, subs, retained_totals)
            reports.append(report)

            if config.attack is not None:
                effective = overlays[epoch]
                if config.attack.kind == "topic-withhold":
                    victim = config.attack.victim_topic
                    attack_rows.append(
                        (
                            epoch,
                            report.rate_by_topic.get(victim),
                            report.delay_by_topic.get(victim),
                            attacker_outgoing_fraction(effective, attackers, honest_victims),
                        )
                    )
                else:
                    attack_rows.append(
                        (epoch, None, None, attacker_outgoing_fraction(effective, attackers))
                    )

        out_dir = None
        if write_outputs:
            stage = "write-outputs"
            out_dir = os.path.join(config.out_dir, f"seed_{seed}")
            os.makedirs(out_dir, exist_ok=True)
            snapshots = _snapshot_epochs(config)
            write_reports(reports, out_dir, {e: overlays[e] for e in snapshots})
            write_manifest(config.to_dict(), seed, os.path.join(out_dir, "run_manifest.json"))
            if config.attack is not None:
                write_attack_metrics(attack_rows, os.path.join(out_dir, "attack_metrics.csv"))

        return RunResult(
            seed=seed,
            config=config,
            reports=reports,
            overlays=overlays,
            attack_rows=attack_rows,
            attackers=attackers,
            out_dir=out_dir,
            traces=traces,
        )
    except StageFailure:
        raise
    except Exception as exc:
        raise StageFailure(stage, exc) from exc


def _snapshot_epochs(config: ExperimentConfig) -> list[int]:
    last = config.num_epochs - 1
    every = config.overlay_snapshot_every
    epochs = {0, last}
    if every > 0:
        epochs.update(range(0, config.num_epochs, every))
    return sorted(epochs)


@dataclass(eq=False)
class ExperimentOutcome:
    results: list[RunResult]
    failures: list[tuple[int, str, str]]
    summary_path: Optional[str] = None

    @property
    def ok(self) -> bool:
        return not self.failures


def run_experiment(
    config: ExperimentConfig,
    parallel: int = 1,
    write_outputs: bool = True,
) -> ExperimentOutcome:
    """Run every seed, then write the across-seed summary.

    A failing seed is reported (seed, stage, message) without disturbing the
    others.
    """
    results: list[RunResult] = []
    failures: list[tuple[int, str, str]] = []
    if parallel > 1 and len(config.seeds) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            futures = {
                seed: pool.submit(run_seed, config, seed, write_outputs) for seed in config.seeds
            }
            for seed in config.seeds:
                try:
                    results.append(futures[seed].result())
                except StageFailure as exc:
                    failures.append((seed, exc.stage, str(exc.cause)))
    else:
        for seed in config.seeds:
            try:
                results.append(run_seed(config, seed, write_outputs))
            except StageFailure as exc:
                failures.append((seed, exc.stage, str(exc.cause)))

    summary_path = None
    if write_outputs and results:
        per_seed = []
        for res in results:
            rows = metrics_rows(res.reports)
            per_seed.append([(e, m, float(v)) for e, m, v in rows])
        summary = summarize_seed_metrics(per_seed)
        os.makedirs(config.out_dir, exist_ok=True)
        summary_path = os.path.join(config.out_dir, "summary.csv")
        write_summary(summary, summary_path)
    return ExperimentOutcome(results, failures, summary_path)


def reread_metrics(result: RunResult) -> list[tuple[int, str, float]]:
    """Convenience for determinism checks: parse the run's metrics.csv back."""
    if result.out_dir is None:
        raise ConfigurationError("run was executed with write_outputs=False")
    return read_metrics_csv(os.path.join(result.out_dir, "metrics.csv"))
