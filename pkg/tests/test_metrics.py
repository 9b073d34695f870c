import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from evsr import SensorGeometry, SynthConfig, bin_events, encode, rmse, simulate, stats, validate_stream
from evsr.exceptions import BadBinCount, GeometryMismatch

from conftest import streams

G = SensorGeometry(3, 3)


def test_single_event_bin():
    b = bin_events(validate_stream([(1, 2, 0, 1)], G, 100), 4).counts
    assert b[0, 2, 1, 1] == 1 and b.sum() == 1


def test_last_timestamp_in_last_bin():
    b = bin_events(validate_stream([(0, 0, 100, -1)], G, 100), 4).counts
    assert b[3, 0, 0, 0] == 1


def test_single_bin_is_spatial_histogram(small_stream):
    b = bin_events(small_stream, 1).counts
    assert b.shape == (1, 2, 3, 2)
    assert b[0, 0, 0].tolist() == [1, 2]


def test_bin_brute_force(small_stream):
    counts = bin_events(small_stream, 4).counts
    ref = np.zeros_like(counts)
    for x, y, t, p in small_stream:
        ref[min(t * 4 // small_stream.T, 3), y, x, int(p > 0)] += 1
    assert np.array_equal(counts, ref)


@pytest.mark.parametrize("bins", [0, -2, 1.5])
def test_bad_bins(bins, small_stream):
    with pytest.raises(BadBinCount):
        bin_events(small_stream, bins)


def test_uniform_events_fill_bins_evenly():
    rng = np.random.default_rng(0)
    n = 2000
    s = validate_stream(zip(rng.integers(0, 3, n), rng.integers(0, 3, n), rng.integers(0, 16000, n),
                            rng.choice([-1, 1], n)), G, 16000)
    per_bin = bin_events(s, 16).counts.sum(axis=(1, 2, 3))
    assert per_bin.max() <= 2 * per_bin.min()


@given(streams(), st.integers(1, 20))
def test_count_conservation(s, bins):
    assert bin_events(s, bins).counts.sum() == len(s)


@given(streams(), st.integers(1, 20))
def test_rmse_identity(s, bins):
    assert rmse(s, s, bins) == 0.0


@given(streams(), streams())
def test_rmse_symmetric(a, b):
    if a.geometry != b.geometry:
        with pytest.raises(GeometryMismatch):
            rmse(a, b)
        return
    assert rmse(a, b) == rmse(b, a)
    assert rmse(a, b) >= 0


def test_rmse_sensitive_to_one_event(small_stream):
    extra = validate_stream(list(small_stream) + [(2, 0, 60, 1)], small_stream.geometry, small_stream.T)
    assert rmse(small_stream, extra) > 0


def test_rmse_hand_value():
    a = validate_stream([(0, 0, 0, 1)], SensorGeometry(1, 1), 10)
    b = validate_stream([(0, 0, 0, -1)], SensorGeometry(1, 1), 10)
    # one bin x 2 channels, normalized grids [0, 1] and [1, 0]
    assert rmse(a, b, 1) == pytest.approx(1.0)


def test_stats_empty():
    st_ = stats(validate_stream([], G))
    assert st_["events"] == 0 and st_["L"] == 0 and st_["events_per_s"] == 0.0


def test_stats_consistent_with_voxels(small_stream):
    st_ = stats(small_stream)
    assert st_["L"] == encode(small_stream).L == 3
    assert st_["count_histogram"] == [3, 2, 0, 1]
    assert st_["positive"] == 3 and st_["negative"] == 2
    assert st_["events_per_s"] == pytest.approx(5 / 100e-6)


def test_bar_polarity_balanced():
    st_ = stats(simulate(SynthConfig()))
    assert st_["polarity_ratio"] == pytest.approx(1.0)
