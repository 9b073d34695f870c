import numpy as np
import pytest
from hypothesis import given

from evsr import EventStream, SensorGeometry, group_by_pixel, normalize, validate_stream
from evsr.events import denormalize, pixel_counts
from evsr.exceptions import BadPolarity, OutOfBounds, TimeExtentTooSmall, ZeroExtent

from conftest import streams

GEO = SensorGeometry(4, 3)


def test_validate_sorts_by_time_then_position():
    s = validate_stream([(1, 0, 5, 1), (0, 0, 5, -1), (3, 2, 1, 1)], GEO)
    assert [tuple(e) for e in s] == [(3, 2, 1, 1), (0, 0, 5, -1), (1, 0, 5, 1)]
    assert s.T == 5


def test_validate_keeps_duplicates():
    s = validate_stream([(1, 1, 3, 1)] * 3, GEO)
    assert len(s) == 3


@pytest.mark.parametrize("event, err", [
    ((4, 0, 0, 1), OutOfBounds),
    ((0, 3, 0, 1), OutOfBounds),
    ((-1, 0, 0, 1), OutOfBounds),
    ((0, 0, 0, 0), BadPolarity),
    ((0, 0, 0, 2), BadPolarity),
])
def test_validate_rejects(event, err):
    with pytest.raises(err):
        validate_stream([event], GEO)


def test_time_extent_too_small():
    with pytest.raises(TimeExtentTooSmall):
        validate_stream([(0, 0, 10, 1)], GEO, T_hint=5)


def test_empty_stream():
    s = validate_stream([], GEO, T_hint=7)
    assert len(s) == 0 and s.T == 7
    assert group_by_pixel(s) == {}


def test_stream_is_immutable(small_stream):
    with pytest.raises(ValueError):
        small_stream.t[0] = 3


def test_group_by_pixel(small_stream):
    trains = group_by_pixel(small_stream)
    assert set(trains) == {(0, 0), (1, 0), (2, 1)}
    assert trains[(0, 0)].t.tolist() == [10, 30, 50]
    assert trains[(0, 0)].p.tolist() == [1, -1, 1]


@given(streams())
def test_group_by_pixel_partitions_stream(s):
    trains = group_by_pixel(s)
    assert sum(len(tr) for tr in trains.values()) == len(s)
    for tr in trains.values():
        assert np.all(np.diff(tr.t) >= 0)
    counts = pixel_counts(s)
    for (x, y), tr in trains.items():
        assert counts[y, x] == len(tr)


@given(streams())
def test_sorted_invariant(s):
    key = list(zip(s.t.tolist(), s.y.tolist(), s.x.tolist(), s.p.tolist()))
    assert key == sorted(key)


def test_normalize_values(small_stream):
    n = normalize(small_stream)
    assert n[0].tolist() == [0.0, 0.0, 0.1]
    assert n[-1].tolist() == [0.0, 0.0, 0.5]
    assert normalize(small_stream)[3].tolist() == [1.0, 1.0, 0.3]


def test_normalize_single_column_sensor():
    s = validate_stream([(0, 1, 4, 1)], SensorGeometry(1, 2), T_hint=8)
    assert normalize(s).tolist() == [[0.0, 1.0, 0.5]]


def test_normalize_zero_extent():
    with pytest.raises(ZeroExtent):
        normalize(validate_stream([(0, 0, 0, 1)], GEO))


@given(streams())
def test_normalize_roundtrip(s):
    if len(s) and s.T == 0:
        return
    n = normalize(s)
    assert np.all((n >= 0) & (n <= 1))
    back = denormalize(n, s.geometry, s.T)
    if s.geometry.width > 1:
        assert np.array_equal(back[:, 0], s.x)
    if s.geometry.height > 1:
        assert np.array_equal(back[:, 1], s.y)
    assert np.array_equal(back[:, 2], s.t)


def test_equality_and_time_extent(small_stream):
    assert small_stream == small_stream.with_time_extent(100)
    assert small_stream != small_stream.with_time_extent(200)
