"""Deterministic simulator and protocol library for pub/sub overlay construction.

Nodes adaptively rewire a bounded-degree overlay from local delivery
observations: each epoch they retain their best-scoring neighbor subset and
explore replacements biased toward underperforming topics. The package also
ships static baseline topologies, attacker models, per-epoch metrics and a
CLI experiment runner emitting reproducible CSV artifacts.
"""

from .adversary import (
    AttackConfig,
    WithholdBehavior,
    apply_eclipse,
    apply_topic_withhold,
    attacker_ids,
    attacker_outgoing_fraction,
    eviction_curve,
    per_node_attacker_fraction,
)
from .config import (
    ExperimentConfig,
    NetworkConfig,
    PRESETS,
    apply_overrides,
    config_from_dict,
    load_config,
    resolve_config,
    save_config,
    validate_config,
)
from .errors import ConfigurationError, IngestionError, SamplingError
from .explore import (
    ExplorationPlan,
    TopicScore,
    candidate_weights,
    per_topic_scores,
    sample_replacements,
    underperforming_topics,
)
from .experiment import ExperimentOutcome, RunResult, StageFailure, run_experiment, run_seed
from .gossip import (
    DeliveryEvent,
    EpochTrace,
    Message,
    MessageObservation,
    ObservationLog,
    PublicationSchedule,
    make_schedule,
    read_trace_csv,
    record_observation,
    relay_decision,
    run_epoch,
)
from .metrics import (
    EpochReport,
    avg_propagation_delay,
    build_report,
    read_metrics_csv,
    receive_rate,
    score_statistics,
    write_reports,
)
from .netmodel import (
    LatencyModel,
    OverlayGraph,
    SubscriptionTable,
    build_subscriptions,
    complete_overlay,
    load_latency_matrix,
    random_overlay,
    unit_square_latency,
)
from .protocols import (
    POLICY_KINDS,
    PolicyConfig,
    gossipsub_like_overlay,
    initial_overlay,
    scribe_overlay,
    topiary_epoch_update,
    update_all,
)
from .rng import derive_rng
from .scoring import (
    NeighborObservations,
    ScoreWeights,
    SubsetScore,
    bandwidth_wastage_score,
    build_epoch_observations,
    overall_score,
    select_best_subset,
    topic_coverage_score,
    topic_delay_score,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
