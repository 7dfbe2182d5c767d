from __future__ import annotations

from topiary.rng import derive_rng


def test_same_labels_same_stream():
    a = derive_rng(7, "subs")
    b = derive_rng(7, "subs")
    assert [a.random() for _ in range(20)] == [b.random() for _ in range(20)]


def test_different_labels_differ():
    streams = {
        "subs": derive_rng(7, "subs").random(),
        "overlay": derive_rng(7, "overlay").random(),
        "explore/0/0": derive_rng(7, "explore", 0, 0).random(),
        "explore/0/1": derive_rng(7, "explore", 0, 1).random(),
        "explore/1/0": derive_rng(7, "explore", 1, 0).random(),
        "seed8": derive_rng(8, "subs").random(),
    }
    assert len(set(streams.values())) == len(streams)


def test_streams_do_not_interact():
    a = derive_rng(3, "a")
    first = a.random()
    b = derive_rng(3, "b")
    b.random()
    a2 = derive_rng(3, "a")
    assert a2.random() == first
