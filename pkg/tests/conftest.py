import numpy as np
import pytest
from hypothesis import strategies as st

from evsr import EventStream, SensorGeometry


@st.composite
def streams(draw, max_side=8, max_events=40, max_t=1000):
    W = draw(st.integers(1, max_side))
    H = draw(st.integers(1, max_side))
    n = draw(st.integers(0, max_events))
    xs = draw(st.lists(st.integers(0, W - 1), min_size=n, max_size=n))
    ys = draw(st.lists(st.integers(0, H - 1), min_size=n, max_size=n))
    ts = draw(st.lists(st.integers(0, max_t), min_size=n, max_size=n))
    ps = draw(st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n))
    extra = draw(st.integers(0, 50))
    T = (max(ts) if ts else 0) + extra
    return EventStream.from_arrays(SensorGeometry(W, H), xs, ys, ts, ps, T)


@pytest.fixture
def small_stream():
    #  x  y   t   p
    ev = np.array([
        [0, 0, 10, 1],
        [1, 0, 20, -1],
        [0, 0, 30, -1],
        [2, 1, 30, 1],
        [0, 0, 50, 1],
    ])
    return EventStream.from_arrays(SensorGeometry(3, 2), ev[:, 0], ev[:, 1], ev[:, 2], ev[:, 3], 100)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
