import math

import pytest

from fspn.events import Event, Interval, VariableMeta, box_volume, boxes_disjoint, normalize_interval

D4 = VariableMeta.discrete("d", 4)
C = VariableMeta.continuous("c", 0.0, 10.0)


def test_variable_meta_validation():
    with pytest.raises(ValueError):
        VariableMeta.discrete("x", 0)
    with pytest.raises(ValueError):
        VariableMeta.continuous("x", 1.0, 1.0)
    assert VariableMeta.from_dict(D4.to_dict()) == D4
    assert VariableMeta.from_dict(C.to_dict()) == C


@pytest.mark.parametrize("iv, want", [
    (Interval(1.2, 2.7), Interval(2, 2)),
    (Interval(1, 3, lo_open=True), Interval(2, 3)),
    (Interval(1, 3, hi_open=True), Interval(1, 2)),
    (Interval(-math.inf, math.inf), Interval(0, 3)),
    (Interval(5, 9), None),
    (Interval(2, 2, lo_open=True, hi_open=True), None),
])
def test_normalize_discrete(iv, want):
    got = normalize_interval(iv, D4)
    if want is None:
        assert got.empty
    else:
        assert got == want


def test_normalize_continuous_clips_and_keeps_open_flags():
    got = normalize_interval(Interval(-5, 3, hi_open=True), C)
    assert (got.lo, got.hi, got.hi_open) == (0.0, 3.0, True)
    assert normalize_interval(Interval(3, 3, lo_open=True), C).empty


def test_interval_intersect_respects_open_ends():
    a = Interval(0, 5)
    b = Interval(5, 9, lo_open=True)
    assert a.intersect(b).empty
    assert Interval(0, 5).intersect(Interval(5, 9)) == Interval(5, 5)


def test_event_from_mapping_by_name_and_index():
    vs = [D4, C]
    e = Event.from_mapping(vs, {"d": 2, 1: (1.0, 4.0)})
    assert e[0] == Interval(2, 2)
    assert e[1] == Interval(1.0, 4.0)
    with pytest.raises(KeyError):
        Event.from_mapping(vs, {"zz": 1})
    assert Event.full(vs) == Event.from_mapping(vs, {})


def test_boxes_and_volume():
    vs = [D4, C]
    a = (Interval(0, 1), Interval(0.0, 5.0))
    b = (Interval(2, 3), Interval(0.0, 5.0))
    c = (Interval(0, 3), Interval(5.0, 10.0, lo_open=True))
    assert boxes_disjoint(a, b)
    assert boxes_disjoint(a, c)
    assert not boxes_disjoint(a, (Interval(1, 2), Interval(4.0, 6.0)))
    assert box_volume(a, vs, [0, 1]) == pytest.approx(2 * 5.0)
