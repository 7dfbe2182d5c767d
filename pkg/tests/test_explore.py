from __future__ import annotations

from collections import Counter
from random import Random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topiary.errors import ConfigurationError, SamplingError
from topiary.explore import (
    ExplorationPlan,
    TopicScore,
    candidate_weights,
    per_topic_scores,
    sample_replacements,
    underperforming_topics,
    write_exploration_csv,
)
from topiary.scoring import ScoreWeights

import oracles
from helpers import make_subs
from test_scoring import log_from_ref, ref_logs


def weights(w_c=1.0, w_d=10.0, keep=2, switch=1):
    return ScoreWeights(
        coverage_weight=w_c, delay_weight=w_d, wastage_weight=0.0,
        keep_count=keep, switch_count=switch,
    )


# ---------------------------------------------------------------- per-topic scores


def test_instant_full_delivery_scores_zero():
    ref = {mid: (0, {1: 5.0 * mid, 2: 5.0 * mid}) for mid in range(4)}
    log = log_from_ref(ref)
    scores = per_topic_scores([1, 2], log, [0], {0: 4}, weights())
    assert scores == [TopicScore(0, 0.0, 0.0, 0.0)]


def test_half_coverage_hand_arithmetic():
    # Topic 1: 10 published, retained subset delivers 5 with mean
    # normalized delay 2.0 under (w_c=1, w_d=10) -> 0.5 + 20.0.
    ref = {}
    for mid in range(5):
        base = 100.0 * mid
        ref[mid] = (1, {9: base, 1: base + 2.0})
    log = log_from_ref(ref)
    scores = per_topic_scores([1], log, [1], {1: 10}, weights(w_c=1.0, w_d=10.0))
    (s,) = scores
    assert s.delay == 2.0
    assert s.coverage == 0.5
    assert s.total == 20.5


def test_one_score_per_subscribed_topic():
    ref = {0: (0, {1: 1.0}), 1: (2, {1: 2.0})}
    log = log_from_ref(ref)
    scores = per_topic_scores([1], log, [0, 1, 2], {0: 1, 1: 1, 2: 1}, weights())
    assert [s.topic for s in scores] == [0, 1, 2]
    # Topic 1 saw no deliveries from the subset: sentinel delay, full miss.
    assert scores[1].coverage == 1.0
    assert scores[1].delay == 0.0  # no normalized spread observed anywhere


def test_per_topic_sentinel_is_node_level():
    # Worst normalized delay anywhere in the log (topic 0, spread 8) charges
    # the empty topic-1 delivery record.
    ref = {
        0: (0, {1: 10.0, 2: 18.0}),
        1: (1, {2: 30.0}),
    }
    log = log_from_ref(ref)
    scores = per_topic_scores([1], log, [0, 1], {0: 1, 1: 1}, weights(w_c=0.0, w_d=1.0))
    by_topic = {s.topic: s for s in scores}
    assert by_topic[1].delay == 16.0
    assert by_topic[0].delay == 0.0


def test_per_topic_requires_published_count():
    ref = {0: (0, {1: 1.0})}
    log = log_from_ref(ref)
    with pytest.raises(ConfigurationError):
        per_topic_scores([1], log, [0], {0: 0}, weights())


@given(ref_logs(), st.data())
@settings(max_examples=80, deadline=None)
def test_per_topic_scores_match_oracle(case, data):
    ref, candidates, subscribed, published = case
    log = log_from_ref(ref)
    size = data.draw(st.integers(min_value=0, max_value=len(candidates)))
    retained = sorted(data.draw(st.permutations(candidates))[:size])
    w = weights(w_c=1.0, w_d=10.0)
    got = per_topic_scores(retained, log, subscribed, published, w)
    expect = oracles.per_topic_totals(ref, retained, set(subscribed), published, 1.0, 10.0)
    assert {s.topic: s.total for s in got} == expect


# ---------------------------------------------------------------- threshold rule


def _scores(pairs):
    return [TopicScore(t, 0.0, 0.0, total) for t, total in pairs]


def test_zero_floor_degenerates_to_any_positive():
    out = underperforming_topics(_scores([(1, 0.0), (2, 20.5)]), 2.0)
    assert out == {2}


def test_equal_scores_mean_no_underperformers():
    out = underperforming_topics(_scores([(0, 3.0), (1, 3.0), (2, 3.0)]), 2.0)
    assert out == set()


def test_threshold_cut():
    out = underperforming_topics(_scores([(0, 10.0), (1, 15.0), (2, 25.0)]), 2.0)
    assert out == {2}


def test_threshold_must_exceed_one():
    with pytest.raises(ConfigurationError):
        underperforming_topics(_scores([(0, 1.0)]), 1.0)


@given(
    st.lists(
        st.tuples(st.integers(0, 9), st.floats(0.0, 100.0, allow_nan=False)),
        min_size=1,
        max_size=8,
        unique_by=lambda p: p[0],
    ),
    st.floats(1.001, 10.0),
)
@settings(max_examples=60, deadline=None)
def test_cheapest_topic_never_underperforms(pairs, threshold):
    scores = _scores(pairs)
    out = underperforming_topics(scores, threshold)
    floor_topic = min(scores, key=lambda s: s.total).topic
    assert floor_topic not in out
    assert out == oracles.underperforming({t: s for t, s in pairs}, threshold)


# ---------------------------------------------------------------- candidate weights


def test_overlap_counting():
    subs = make_subs([{0}, {0, 1}, {0, 1, 2}, {2}], 3)
    w = candidate_weights({0, 1}, subs, exclude={0})
    assert w == {1: 2, 2: 2, 3: 0}
    w2 = candidate_weights({0, 1}, subs, exclude=set())
    assert w2[1] == 2 and w2[2] == 2 and w2[3] == 0 and w2[0] == 1


def test_empty_underperforming_set_gives_zero_weights():
    subs = make_subs([{0}, {1}, {0, 1}], 2)
    assert candidate_weights(set(), subs, exclude={0}) == {1: 0, 2: 0}


def test_excluded_nodes_absent():
    subs = make_subs([{0}, {0}, {0}, {0}], 1)
    w = candidate_weights({0}, subs, exclude={0, 2})
    assert set(w) == {1, 3}


# ---------------------------------------------------------------- sampling


def test_full_pool_returned_when_count_matches():
    got = sample_replacements({5: 0, 2: 7, 9: 1}, 3, Random(0))
    assert sorted(got) == [2, 5, 9]


def test_oversized_request_is_sampling_error():
    with pytest.raises(SamplingError):
        sample_replacements({1: 1, 2: 1}, 3, Random(0))


def test_sampling_deterministic_per_seed():
    w = {u: u % 3 for u in range(20)}
    a = sample_replacements(w, 5, Random(77))
    b = sample_replacements(w, 5, Random(77))
    assert a == b
    assert len(set(a)) == 5
    assert all(u in w for u in a)


def test_zero_weight_excluded_while_positive_exists():
    w = {1: 0, 2: 3, 3: 0, 4: 2}
    for seed in range(200):
        picks = sample_replacements(w, 2, Random(seed))
        assert set(picks) <= {2, 4}


def test_uniform_fallback_reaches_everyone():
    w = {1: 0, 2: 0, 3: 0}
    seen = set()
    for seed in range(60):
        seen.update(sample_replacements(w, 1, Random(seed)))
    assert seen == {1, 2, 3}


def test_first_draw_frequencies_track_weights():
    # Smoke-scale law check; the acceptance suite runs the chi-square.
    w = {1: 1, 2: 2}
    rng = Random(4)
    counts = Counter(sample_replacements(w, 1, rng)[0] for _ in range(3000))
    assert abs(counts[2] / 3000 - 2 / 3) < 0.05


def test_uniform_fallback_frequencies():
    w = {1: 0, 2: 0}
    rng = Random(4)
    counts = Counter(sample_replacements(w, 1, rng)[0] for _ in range(3000))
    assert abs(counts[1] / 3000 - 0.5) < 0.05


# ---------------------------------------------------------------- plan logging


def test_exploration_csv(tmp_path):
    plan = ExplorationPlan(underperforming=(1, 4), replaced=(7,), added=(9,))
    empty = ExplorationPlan(underperforming=(), replaced=(), added=())
    path = tmp_path / "explore.csv"
    write_exploration_csv(path, [(3, 0, plan), (3, 1, empty)])
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "epoch,node_id,underperforming_topics,replaced_neighbors,new_neighbors"
    assert lines[1] == "3,0,1|4,7,9"
    assert lines[2] == "3,1,,,"
