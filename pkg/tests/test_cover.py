import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmgerbe import Chart, Cover, overlap, sample_points
from qmgerbe.errors import DomainError


def test_interval_intersection():
    cover = Cover.intervals([(0, 2), (1, 3)])
    r = overlap(cover, (1, 2))
    assert not r.empty
    assert r.lo == (1.0,) and r.hi == (2.0,)


def test_disjoint_boxes_are_empty():
    cover = Cover.intervals([(0, 1), (2, 3)])
    assert overlap(cover, (1, 2)).empty


def test_touching_boxes_are_empty():
    # open boxes sharing only an endpoint do not meet
    cover = Cover.intervals([(0, 1), (1, 2)])
    assert overlap(cover, (1, 2)).empty


def test_self_overlap_is_idempotent():
    cover = Cover(2, [Chart(7, (0, -1), (2, 1))])
    r = overlap(cover, (7, 7))
    assert r.lo == (0.0, -1.0) and r.hi == (2.0, 1.0)


def test_unknown_label():
    cover = Cover.intervals([(0, 2), (1, 3)])
    with pytest.raises(KeyError):
        overlap(cover, (1, 9))


def test_overlap_needs_two_labels():
    cover = Cover.intervals([(0, 2)])
    with pytest.raises(DomainError):
        overlap(cover, (1,))


def test_chart_validation():
    with pytest.raises(DomainError):
        Chart(1, (0, 1), (1, 1))
    with pytest.raises(DomainError):
        Cover(1, [])
    with pytest.raises(DomainError):
        Cover(1, [Chart(1, 0, 1), Chart(1, 0.5, 2)])
    with pytest.raises(DomainError):
        Cover(2, [Chart(1, 0, 1)])


def test_json_round_trip():
    cover = Cover(2, [Chart(1, (0, 0), (2, 1)), Chart(4, (1, -1), (3, 0.5))])
    again = Cover.from_json(cover.to_json())
    assert again == cover
    assert again.to_dict() == {
        "d": 2,
        "charts": [{"index": 1, "lo": [0.0, 0.0], "hi": [2.0, 1.0]}, {"index": 4, "lo": [1.0, -1.0], "hi": [3.0, 0.5]}],
    }


def test_nonempty_overlaps():
    cover = Cover.intervals([(0, 2), (1, 3), (2.5, 4)])
    assert cover.nonempty_overlaps(2) == [(1, 2), (2, 3)]
    assert cover.nonempty_overlaps(3) == []


def test_sampling_is_deterministic():
    box = overlap(Cover(2, [Chart(1, (0, 0), (1, 1)), Chart(2, (0, 0), (1, 1))]), (1, 2))
    a = sample_points(box, 1, seed=5)
    b = sample_points(box, 1, seed=5)
    assert np.array_equal(a[0], b[0])


def test_samples_strictly_inside():
    cover = Cover(3, [Chart(1, (0, 0, 0), (1, 2, 3)), Chart(2, (0.5, 1, -1), (4, 4, 1))])
    r = overlap(cover, (1, 2))
    pts = sample_points(r, 5, seed=1)
    assert len(pts) == 5
    for p in pts:
        assert np.all(p > r.lo) and np.all(p < r.hi)
        assert r.contains(p)


def test_samples_depend_on_seed():
    box = Chart(1, (0, 0), (1, 1))
    reference = sample_points(box, 4, seed=0)
    differ = sum(not np.array_equal(reference, sample_points(box, 4, seed=s)) for s in range(1, 101))
    assert differ == 100


def test_sampling_rejects_empty_region():
    r = overlap(Cover.intervals([(0, 1), (2, 3)]), (1, 2))
    with pytest.raises(DomainError):
        sample_points(r, 3, seed=0)


boxes = st.lists(
    st.tuples(st.floats(-5, 5), st.floats(0.1, 5)).map(lambda p: (p[0], p[0] + p[1])), min_size=3, max_size=5
)


@settings(max_examples=60, deadline=None)
@given(boxes)
def test_overlap_order_independent(bounds):
    cover = Cover.intervals(bounds)
    labels = cover.labels
    for combo in itertools.combinations(labels, 3):
        ref = overlap(cover, combo)
        for perm in itertools.permutations(combo):
            r = overlap(cover, perm)
            assert (r.lo, r.hi, r.empty) == (ref.lo, ref.hi, ref.empty)
        # associativity: intersecting in two steps gives the same box
        a, b, c = combo
        ab = overlap(cover, (a, b))
        if not ab.empty:
            nested = Cover(1, [Chart(0, ab.lo, ab.hi), cover.chart(c)])
            two_step = overlap(nested, (0, c))
            assert (two_step.lo, two_step.hi, two_step.empty) == (ref.lo, ref.hi, ref.empty)


@settings(max_examples=60, deadline=None)
@given(boxes)
def test_triple_inside_every_pair(bounds):
    cover = Cover.intervals(bounds)
    for combo in itertools.combinations(cover.labels, 3):
        t = overlap(cover, combo)
        if t.empty:
            continue
        for pair in itertools.combinations(combo, 2):
            p = overlap(cover, pair)
            assert not p.empty
            assert np.all(np.array(t.lo) >= p.lo) and np.all(np.array(t.hi) <= p.hi)
