from __future__ import annotations

from itertools import combinations
from math import comb
from random import Random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topiary.errors import ConfigurationError
from topiary.gossip import ObservationLog, run_epoch
from topiary.scoring import (
    ScoreWeights,
    bandwidth_wastage_score,
    combined_score_core,
    build_epoch_observations,
    observations_from_log,
    overall_score,
    score_all_subsets,
    select_best_subset,
    select_best_subset_core,
    topic_coverage_score,
    topic_delay_score,
    write_score_table,
)

import oracles
from helpers import random_messages, random_net, schedule_of


def log_from_ref(ref: oracles.RefLog, owner: int = 0) -> ObservationLog:
    log = ObservationLog(owner=owner)
    for mid, (topic, entry) in ref.items():
        for sender, t in entry.items():
            log.record(mid, sender, t, topic=topic)
    return log


def two_message_log() -> ObservationLog:
    # m1: neighbor 1 delivers first, neighbor 2 five later; m2 reversed with
    # a three-unit gap.
    ref = {
        1: (0, {1: 10.0, 2: 15.0}),
        2: (0, {2: 20.0, 1: 23.0}),
    }
    return log_from_ref(ref)


# ---------------------------------------------------------------- delay score


def test_delay_hand_example():
    log = two_message_log()
    assert topic_delay_score([1], log, [0]) == 1.5
    assert topic_delay_score([2], log, [0]) == 2.5
    assert topic_delay_score([1, 2], log, [0]) == 0.0


def test_full_neighbor_set_scores_zero_delay():
    rng = Random(3)
    ref: oracles.RefLog = {}
    neighbors = [1, 2, 3, 4]
    for mid in range(12):
        arrivals = {
            u: rng.uniform(0, 10) for u in rng.sample(neighbors, rng.randint(1, 4))
        }
        ref[mid] = (0, arrivals)
    log = log_from_ref(ref)
    assert topic_delay_score(neighbors, log, [0]) == 0.0


def test_delay_sentinel_for_silent_subset():
    ref = {
        1: (0, {1: 10.0, 2: 17.0}),
        2: (0, {1: 4.0, 2: 5.0}),
    }
    log = log_from_ref(ref)
    # Neighbor 3 never delivered; worst observed normalized delay is 7.
    assert topic_delay_score([3], log, [0]) == 14.0


def test_delay_sentinel_on_empty_log():
    log = ObservationLog(owner=0)
    assert topic_delay_score([1], log, [0]) == 0.0


def test_delay_ignores_uninterested_messages():
    ref = {
        1: (0, {1: 10.0, 2: 12.0}),
        2: (1, {1: 50.0, 2: 90.0}),
    }
    log = log_from_ref(ref)
    assert topic_delay_score([2], log, [0]) == 2.0


# ---------------------------------------------------------------- coverage score


def coverage_fixture(delivered: int, published: int):
    ref: oracles.RefLog = {}
    for mid in range(delivered):
        ref[mid] = (0, {1: float(mid)})
    return log_from_ref(ref), {0: published}


def test_coverage_full():
    log, counts = coverage_fixture(10, 10)
    assert topic_coverage_score([1], log, [0], counts) == 0.0


def test_coverage_eight_of_ten():
    log, counts = coverage_fixture(8, 10)
    assert topic_coverage_score([1], log, [0], counts) == pytest.approx(0.2)
    assert topic_coverage_score([1], log, [0], counts) == 1.0 - 8 / 10


def test_coverage_empty_subset_is_total_miss():
    log, counts = coverage_fixture(10, 10)
    assert topic_coverage_score([], log, [0], counts) == 1.0


def test_coverage_clamped_when_published_undercounted():
    log, _ = coverage_fixture(5, 5)
    assert topic_coverage_score([1], log, [0], {0: 3}) == 0.0


def test_coverage_requires_positive_published_counts():
    log, _ = coverage_fixture(2, 2)
    with pytest.raises(ConfigurationError):
        topic_coverage_score([1], log, [0], {0: 0})
    with pytest.raises(ConfigurationError):
        topic_coverage_score([1], log, [0], {})


def test_coverage_sums_over_subscribed_topics():
    ref = {
        0: (0, {1: 1.0}),
        1: (1, {1: 2.0}),
        2: (1, {2: 3.0}),
    }
    log = log_from_ref(ref)
    counts = {0: 2, 1: 2}
    # Subset {1} delivers 2 of the 4 interested publications.
    assert topic_coverage_score([1], log, [0, 1], counts) == 0.5


# ---------------------------------------------------------------- wastage score


def test_wastage_counts_messages_not_copies():
    ref = {
        0: (1, {1: 1.0}),
        1: (1, {1: 2.0, 2: 2.5}),
        2: (1, {3: 3.0}),
        3: (0, {1: 4.0}),
    }
    log = log_from_ref(ref)
    assert bandwidth_wastage_score([1, 2], log, [0]) == 2.0
    assert bandwidth_wastage_score([3], log, [0]) == 1.0
    assert bandwidth_wastage_score([1, 2, 3], log, [0]) == 3.0


def test_wastage_zero_without_uninterested_traffic():
    log, _ = coverage_fixture(4, 4)
    assert bandwidth_wastage_score([1], log, [0]) == 0.0


# ---------------------------------------------------------------- combined score


def weights(w_c=1.0, w_d=3000.0, w_w=0.0, keep=4, switch=2, **kw):
    return ScoreWeights(
        coverage_weight=w_c,
        delay_weight=w_d,
        wastage_weight=w_w,
        keep_count=keep,
        switch_count=switch,
        **kw,
    )


def test_overall_zero_when_coverage_only_and_full():
    log, counts = coverage_fixture(10, 10)
    score = overall_score([1], log, [0], counts, weights(w_c=1.0, w_d=0.0, w_w=0.0))
    assert score.total == 0.0


def test_overall_hand_arithmetic():
    # Coverage 8/10 with the delivering neighbor averaging 1.5 normalized
    # delay; a faster neighbor pins the baseline at zero.
    tildes = [0.0, 3.0, 1.5, 1.5, 1.5, 1.5, 1.5, 1.5]
    ref: oracles.RefLog = {}
    for k, tilde in enumerate(tildes):
        base = 10.0 * k
        ref[k] = (0, {9: base, 1: base + tilde})
    log = log_from_ref(ref)
    counts = {0: 10}
    score = overall_score([1], log, [0], counts, weights(w_c=1.0, w_d=1000.0, w_w=0.0))
    assert score.delay == 1.5
    assert score.coverage == pytest.approx(0.2)
    assert score.total == 1.0 * score.coverage + 1000.0 * 1.5
    assert score.total == pytest.approx(1500.2)


def test_weight_scaling_preserves_argmin():
    rng = Random(8)
    for trial in range(10):
        ref: oracles.RefLog = {}
        for mid in range(10):
            senders = rng.sample([1, 2, 3, 4], rng.randint(1, 3))
            ref[mid] = (rng.randrange(2), {u: rng.uniform(0, 20) for u in senders})
        log = log_from_ref(ref)
        counts = {0: 6, 1: 6}
        base = weights(w_c=1.0, w_d=7.0, w_w=2.0, keep=2, switch=2)
        scaled = weights(w_c=13.0, w_d=91.0, w_w=26.0, keep=2, switch=2)
        a = select_best_subset([1, 2, 3, 4], log, [0, 1], counts, base)
        b = select_best_subset([1, 2, 3, 4], log, [0, 1], counts, scaled)
        assert a.members == b.members


def test_score_validation():
    with pytest.raises(ConfigurationError):
        ScoreWeights(coverage_weight=-1.0)
    with pytest.raises(ConfigurationError):
        ScoreWeights(coverage_weight=0.0, delay_weight=0.0, wastage_weight=0.0)
    with pytest.raises(ConfigurationError):
        ScoreWeights(explore_threshold=1.0)
    with pytest.raises(ConfigurationError):
        ScoreWeights(keep_count=0)
    assert ScoreWeights().degree == 6


def test_delivered_fraction_mode_flips_direction():
    log, counts = coverage_fixture(8, 10)
    normal = overall_score([1], log, [0], counts, weights(w_d=0.0))
    flipped = overall_score(
        [1], log, [0], counts, weights(w_d=0.0, coverage_delivered_fraction=True)
    )
    assert normal.coverage == pytest.approx(0.2)
    assert flipped.coverage == pytest.approx(0.8)
    assert flipped.total == pytest.approx(0.8)


# ---------------------------------------------------------------- subset selection


def test_subset_enumeration_count():
    ref = {0: (0, {u: float(u) for u in range(1, 7)})}
    log = log_from_ref(ref)
    obs = observations_from_log(log, range(1, 7), [0], {0: 1})
    scores = score_all_subsets(obs, range(1, 7), weights(keep=4, switch=2))
    assert len(scores) == comb(6, 4) == 15
    listed = [s.members for s in scores]
    assert listed == sorted(listed)


def test_sole_deliverer_always_retained():
    ref: oracles.RefLog = {mid: (0, {2: float(mid)}) for mid in range(6)}
    log = log_from_ref(ref)
    counts = {0: 6}
    w = weights(keep=2, switch=1)
    best = select_best_subset([1, 2, 3], log, [0], counts, w)
    assert 2 in best.members
    assert best.members == oracles.best_subset(
        ref, [1, 2, 3], 2, {0}, counts, w.coverage_weight, w.delay_weight, w.wastage_weight
    )


def test_identical_neighbors_take_lexicographic_tie():
    ref: oracles.RefLog = {
        mid: (0, {u: 5.0 * mid for u in (1, 2, 3, 4)}) for mid in range(4)
    }
    log = log_from_ref(ref)
    best = select_best_subset([4, 2, 3, 1], log, [0], {0: 4}, weights(keep=2, switch=2))
    assert best.members == (1, 2)


def test_keep_count_larger_than_degree_rejected():
    log, counts = coverage_fixture(2, 2)
    with pytest.raises(ConfigurationError):
        select_best_subset([1, 2], log, [0], counts, weights(keep=3, switch=0))


# ---------------------------------------------------------------- property tests


@st.composite
def ref_logs(draw):
    neighbors = draw(st.integers(min_value=2, max_value=6))
    candidates = list(range(1, neighbors + 1))
    num_topics = draw(st.integers(min_value=1, max_value=3))
    subscribed = draw(
        st.sets(st.integers(0, num_topics - 1), min_size=1, max_size=num_topics)
    )
    num_msgs = draw(st.integers(min_value=0, max_value=14))
    ref: oracles.RefLog = {}
    observed: dict[int, int] = {}
    for mid in range(num_msgs):
        topic = draw(st.integers(0, num_topics - 1))
        senders = draw(
            st.sets(st.sampled_from(candidates + [99]), min_size=1, max_size=neighbors)
        )
        entry = {
            u: draw(st.floats(min_value=0.0, max_value=100.0, allow_nan=False))
            for u in sorted(senders)
        }
        ref[mid] = (topic, entry)
        observed[topic] = observed.get(topic, 0) + 1
    published = {}
    for topic in range(num_topics):
        extra = draw(st.integers(min_value=0, max_value=5))
        published[topic] = max(1, observed.get(topic, 0)) + extra
    return ref, candidates, sorted(subscribed), published


@given(ref_logs(), st.data())
@settings(max_examples=120, deadline=None)
def test_scores_match_oracle_exactly(case, data):
    ref, candidates, subscribed, published = case
    log = log_from_ref(ref)
    size = data.draw(st.integers(min_value=0, max_value=len(candidates)))
    subset = sorted(data.draw(st.permutations(candidates))[:size])
    sub_set = set(subscribed)

    assert topic_delay_score(subset, log, subscribed) == oracles.delay_score(
        ref, subset, sub_set
    )
    assert topic_coverage_score(subset, log, subscribed, published) == oracles.coverage_score(
        ref, subset, sub_set, published
    )
    assert bandwidth_wastage_score(subset, log, subscribed) == oracles.wastage_score(
        ref, subset, sub_set
    )
    score = overall_score(subset, log, subscribed, published, weights(w_c=1.0, w_d=7.0, w_w=0.25))
    assert score.total == oracles.total_score(ref, subset, sub_set, published, 1.0, 7.0, 0.25)


@given(ref_logs(), st.integers(min_value=1, max_value=5))
@settings(max_examples=100, deadline=None)
def test_best_subset_matches_oracle(case, keep):
    ref, candidates, subscribed, published = case
    if keep > len(candidates):
        keep = len(candidates)
    log = log_from_ref(ref)
    w = weights(w_c=1.0, w_d=5.0, w_w=0.5, keep=keep, switch=0)
    best = select_best_subset(candidates, log, subscribed, published, w)
    assert best.members == oracles.best_subset(
        ref, candidates, keep, set(subscribed), published, 1.0, 5.0, 0.5
    )


@given(ref_logs(), st.data())
@settings(max_examples=80, deadline=None)
def test_monotonicity_properties(case, data):
    ref, candidates, subscribed, published = case
    log = log_from_ref(ref)
    small = sorted(
        data.draw(st.sets(st.sampled_from(candidates), max_size=len(candidates)))
    )
    grown = sorted(
        set(small)
        | data.draw(st.sets(st.sampled_from(candidates), max_size=len(candidates)))
    )
    sub_set = set(subscribed)

    cov_small = topic_coverage_score(small, log, subscribed, published)
    cov_grown = topic_coverage_score(grown, log, subscribed, published)
    assert 0.0 <= cov_grown <= cov_small <= 1.0

    # Delay is monotone when the delivered message sets agree.
    delivered = lambda s: {
        mid
        for mid, (topic, entry) in ref.items()
        if topic in sub_set and any(u in s for u in entry)
    }
    if delivered(set(small)) == delivered(set(grown)):
        assert topic_delay_score(grown, log, subscribed) <= topic_delay_score(
            small, log, subscribed
        )

    other = sorted(
        data.draw(st.sets(st.sampled_from(candidates), max_size=len(candidates)))
    )
    union = sorted(set(small) | set(other))
    waste = lambda s: bandwidth_wastage_score(s, log, subscribed)
    assert waste(union) <= waste(small) + waste(other)


# ---------------------------------------------------------------- epoch batch path


def test_batch_observations_match_per_node_logs():
    rng = Random(99)
    for _ in range(8):
        overlay, subs, lat = random_net(rng)
        messages = random_messages(rng, subs, count=10)
        sched = schedule_of(messages)
        trace = run_epoch(overlay, subs, lat, sched)
        batch = build_epoch_observations(trace, overlay, subs)
        for v in range(overlay.n):
            outgoing = sorted(overlay.outgoing_of(v))
            log = trace.observation_log(v)
            solo = observations_from_log(
                log, outgoing, subs.topics_of[v], sched.published_by_topic
            )
            got = batch[v]
            assert got.candidates == solo.candidates
            assert got.sentinel == solo.sentinel
            for size in range(1, len(outgoing) + 1):
                ww = ScoreWeights(keep_count=size, switch_count=0)
                for subset in combinations(outgoing, size):
                    a = combined_score_core(got, list(subset), ww)
                    b = combined_score_core(solo, list(subset), ww)
                    assert (a.delay, a.coverage, a.wastage, a.total) == (
                        b.delay,
                        b.coverage,
                        b.wastage,
                        b.total,
                    )


def test_score_table_export(tmp_path):
    log = two_message_log()
    obs = observations_from_log(log, [1, 2], [0], {0: 2})
    scores = score_all_subsets(obs, [1, 2], weights(w_d=1.0, keep=1, switch=1))
    best = select_best_subset_core(obs, [1, 2], weights(w_d=1.0, keep=1, switch=1))
    path = tmp_path / "scores.csv"
    write_score_table([(0, scores, best.members)], path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "node_id,subset_members,f_c,f_d,f_w,total,retained_flag"
    assert len(lines) == 3
    flags = {line.split(",")[1]: line.split(",")[-1] for line in lines[1:]}
    assert flags["1"] == "1" and flags["2"] == "0"
