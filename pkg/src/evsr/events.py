"""Event records, sensor geometry and validated event streams.

Coordinates are 0-based in memory. Timestamps are integer microseconds.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .exceptions import BadPolarity, OutOfBounds, TimeExtentTooSmall, ZeroExtent


class Event(NamedTuple):
    x: int
    y: int
    t: int
    p: int


@dataclass(frozen=True)
class SensorGeometry:
    width: int
    height: int

    def __post_init__(self):
        if int(self.width) < 1 or int(self.height) < 1:
            raise ValueError(f"geometry must be at least 1x1, got {self.width}x{self.height}")
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))

    @property
    def shape(self):
        """(height, width), the array order used everywhere."""
        return (self.height, self.width)

    def scaled(self, factor: int) -> "SensorGeometry":
        return SensorGeometry(self.width * factor, self.height * factor)

    def __str__(self):
        return f"{self.width}x{self.height}"


class ImpulseTrain(NamedTuple):
    """One pixel's events in time order: ``t`` and ``p`` arrays of equal length."""

    pixel: tuple
    t: np.ndarray
    p: np.ndarray

    @property
    def entries(self):
        return list(zip(self.t.tolist(), self.p.tolist()))

    def __len__(self):
        return len(self.t)


def _frozen(a, dtype):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


class EventStream:
    """Immutable, time-sorted collection of events on a sensor.

    Build instances with :func:`validate_stream` or :meth:`from_arrays`;
    the constructor trusts its inputs.
    """

    __slots__ = ("geometry", "x", "y", "t", "p", "T")

    def __init__(self, geometry, x, y, t, p, T):
        self.geometry = geometry
        self.x = _frozen(x, np.int64)
        self.y = _frozen(y, np.int64)
        self.t = _frozen(t, np.int64)
        self.p = _frozen(p, np.int8)
        self.T = int(T)

    @classmethod
    def from_arrays(cls, geometry, x, y, t, p, T=None) -> "EventStream":
        """Validate and sort raw coordinate arrays."""
        x = np.asarray(x)
        y = np.asarray(y)
        t = np.asarray(t)
        p = np.asarray(p)
        n = len(x)
        if not (len(y) == len(t) == len(p) == n):
            raise ValueError("x, y, t, p must have equal length")
        for name, a in (("x", x), ("y", y), ("t", t), ("p", p)):
            if n and not np.all(np.isfinite(a)):
                raise ValueError(f"non-finite values in {name}")
            if n and not np.all(np.asarray(a) == np.round(a)):
                raise ValueError(f"non-integer values in {name}")
        x = x.astype(np.int64)
        y = y.astype(np.int64)
        t = t.astype(np.int64)
        p = p.astype(np.int64)
        if n:
            bad = (x < 0) | (x >= geometry.width) | (y < 0) | (y >= geometry.height)
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                raise OutOfBounds(
                    f"event ({x[i]}, {y[i]}) outside {geometry.width}x{geometry.height} sensor"
                )
            if not np.isin(p, (-1, 1)).all():
                raise BadPolarity(f"polarity must be -1 or +1, got {sorted(set(p.tolist()) - {-1, 1})}")
            if (t < 0).any():
                raise ValueError("timestamps must be non-negative")
        t_max = int(t.max()) if n else 0
        if T is None:
            T = t_max
        elif T < 0:
            raise ValueError("time extent must be non-negative")
        elif T < t_max:
            raise TimeExtentTooSmall(f"T={T} is smaller than the last timestamp {t_max}")
        order = np.lexsort((p, x, y, t))
        return cls(geometry, x[order], y[order], t[order], p[order], T)

    def __len__(self):
        return len(self.t)

    def __iter__(self):
        for x, y, t, p in zip(self.x.tolist(), self.y.tolist(), self.t.tolist(), self.p.tolist()):
            yield Event(x, y, t, p)

    def __getitem__(self, i):
        return Event(int(self.x[i]), int(self.y[i]), int(self.t[i]), int(self.p[i]))

    def __eq__(self, other):
        if not isinstance(other, EventStream):
            return NotImplemented
        return (
            self.geometry == other.geometry
            and self.T == other.T
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.p, other.p)
        )

    def __repr__(self):
        return f"EventStream({len(self)} events, {self.geometry}, T={self.T}us)"

    @property
    def events(self):
        return list(self)

    def with_time_extent(self, T) -> "EventStream":
        return EventStream.from_arrays(self.geometry, self.x, self.y, self.t, self.p, T)


def validate_stream(raw_events: Iterable, geometry: SensorGeometry, T_hint=None) -> EventStream:
    """Validate events (any order) against ``geometry`` and return a sorted stream.

    Ties on timestamp are broken by (y, x, p). Duplicates are kept.
    """
    if T_hint is not None and T_hint < 0:
        raise ValueError("T_hint must be >= 0")
    rows = [tuple(e) for e in raw_events]
    if rows:
        arr = np.array(rows, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise ValueError("events must be (x, y, t, p) records")
        return EventStream.from_arrays(geometry, arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], T_hint)
    return EventStream.from_arrays(geometry, [], [], [], [], T_hint)


def group_by_pixel(stream: EventStream) -> dict:
    """Split a stream into per-pixel impulse trains keyed by ``(x, y)``."""
    if not len(stream):
        return {}
    key = stream.y * stream.geometry.width + stream.x
    # stable sort keeps time order within each pixel
    order = np.argsort(key, kind="stable")
    key_sorted = key[order]
    starts = np.flatnonzero(np.r_[True, key_sorted[1:] != key_sorted[:-1]])
    ends = np.r_[starts[1:], len(order)]
    trains = {}
    for s, e in zip(starts, ends):
        idx = order[s:e]
        k = int(key_sorted[s])
        pix = (k % stream.geometry.width, k // stream.geometry.width)
        trains[pix] = ImpulseTrain(pix, stream.t[idx].copy(), stream.p[idx].astype(np.int64))
    return trains


def pixel_counts(stream: EventStream) -> np.ndarray:
    """Per-pixel event counts as an (H, W) integer array."""
    counts = np.zeros(stream.geometry.shape, dtype=np.int64)
    np.add.at(counts, (stream.y, stream.x), 1)
    return counts


def _axis_scale(n):
    return float(n - 1) if n > 1 else 0.0


def normalize(stream: EventStream) -> np.ndarray:
    """Per-event ``(x, y, t)`` mapped into [0, 1]; returns an (N, 3) float array.

    x uses x/(W-1) (0 when W == 1), y likewise, t uses t/T.
    """
    n = len(stream)
    if n and stream.T == 0:
        raise ZeroExtent("cannot normalize timestamps of a stream with T = 0")
    sx = _axis_scale(stream.geometry.width)
    sy = _axis_scale(stream.geometry.height)
    out = np.zeros((n, 3))
    if n:
        out[:, 0] = stream.x / sx if sx else 0.0
        out[:, 1] = stream.y / sy if sy else 0.0
        out[:, 2] = stream.t / stream.T
    return out


def denormalize(coords, geometry: SensorGeometry, T) -> np.ndarray:
    """Inverse of :func:`normalize`; returns integer (N, 3) ``(x, y, t)``."""
    coords = np.asarray(coords, dtype=float).reshape(-1, 3)
    out = np.empty(coords.shape, dtype=np.int64)
    out[:, 0] = np.rint(coords[:, 0] * _axis_scale(geometry.width))
    out[:, 1] = np.rint(coords[:, 1] * _axis_scale(geometry.height))
    out[:, 2] = np.rint(coords[:, 2] * T)
    return out
