"""Time-free voxel grids: per-pixel polarity sequences stacked along depth."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .events import EventStream, SensorGeometry, pixel_counts
from .exceptions import OutOfBounds


@dataclass(frozen=True)
class VoxelCoding:
    code_plus: float = 0.75
    code_minus: float = 0.25
    code_pad: float = 0.5
    thresh_plus: float = 0.625
    thresh_minus: float = 0.375

    def __post_init__(self):
        if not (self.code_minus < self.thresh_minus < self.code_pad < self.thresh_plus < self.code_plus):
            raise ValueError(
                "coding must satisfy code_minus < thresh_minus < code_pad < thresh_plus < code_plus"
            )

    def code(self, p):
        return np.where(np.asarray(p) > 0, self.code_plus, self.code_minus)


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """``data`` has shape (L, H, W); ``fill_counts`` is (H, W)."""

    data: np.ndarray
    geometry: SensorGeometry
    coding: VoxelCoding = field(default_factory=VoxelCoding)
    fill_counts: np.ndarray = None

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[1:] != self.geometry.shape:
            raise ValueError(f"data shape {self.data.shape} does not match geometry {self.geometry}")
        if self.fill_counts is None:
            object.__setattr__(self, "fill_counts", decoded_lengths(self.data, self.coding))

    @property
    def L(self):
        return self.data.shape[0]

    @property
    def is_empty(self):
        return self.L == 0

    def column(self, x, y):
        return column(self, x, y)


def encode(stream: EventStream, coding: VoxelCoding = VoxelCoding()) -> VoxelGrid:
    """Pack each pixel's polarities into depth order; timestamps are dropped.

    An empty stream gives a 0 x H x W grid (``is_empty`` is True).
    """
    H, W = stream.geometry.shape
    counts = pixel_counts(stream)
    L = int(counts.max()) if len(stream) else 0
    data = np.full((L, H, W), coding.code_pad, dtype=np.float64)
    if L:
        # stream is time-sorted, so a stable sort by pixel keeps time order
        key = stream.y * W + stream.x
        order = np.argsort(key, kind="stable")
        k = key[order]
        first = np.r_[True, k[1:] != k[:-1]]
        start_idx = np.maximum.accumulate(np.where(first, np.arange(len(k)), 0))
        depth = np.arange(len(k)) - start_idx
        data[depth, stream.y[order], stream.x[order]] = coding.code(stream.p[order])
    return VoxelGrid(data, stream.geometry, coding, counts)


def decoded_lengths(data, coding: VoxelCoding) -> np.ndarray:
    """Number of leading non-padding voxels per pixel."""
    L = data.shape[0]
    if L == 0:
        return np.zeros(data.shape[1:], dtype=np.int64)
    is_event = (data >= coding.thresh_plus) | (data <= coding.thresh_minus)
    # first padding index per pixel, L when there is none
    is_pad = ~is_event
    first_pad = np.where(is_pad.any(axis=0), is_pad.argmax(axis=0), L)
    return first_pad.astype(np.int64)


def decode_polarities(data, coding: VoxelCoding) -> np.ndarray:
    """Voxelwise polarity: +1, -1 or 0 (padding), ignoring sequence truncation."""
    out = np.zeros(data.shape, dtype=np.int8)
    out[data >= coding.thresh_plus] = 1
    out[data <= coding.thresh_minus] = -1
    return out


def decode(grid: VoxelGrid) -> dict:
    """Per-pixel polarity sequences ``{(x, y): [p, ...]}`` for non-empty pixels.

    A pixel's sequence ends at its first padding voxel.
    """
    pol = decode_polarities(grid.data, grid.coding)
    lengths = decoded_lengths(grid.data, grid.coding)
    out = {}
    for y, x in zip(*np.nonzero(lengths)):
        n = lengths[y, x]
        out[(int(x), int(y))] = pol[:n, y, x].astype(int).tolist()
    return out


def column(grid: VoxelGrid, x, y) -> np.ndarray:
    """Depth fiber at pixel (x, y), returned as a copy."""
    if not (0 <= x < grid.geometry.width and 0 <= y < grid.geometry.height):
        raise OutOfBounds(f"pixel ({x}, {y}) outside {grid.geometry}")
    return grid.data[:, y, x].copy()


def clamp(data, coding: VoxelCoding) -> np.ndarray:
    return np.clip(data, coding.code_minus, coding.code_plus)
