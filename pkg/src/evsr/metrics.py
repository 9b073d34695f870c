"""Binned spatiotemporal comparison of event streams and stream summaries."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .events import EventStream, pixel_counts
from .exceptions import BadBinCount, GeometryMismatch


@dataclass(frozen=True)
class BinnedGrid:
    """Counts with shape (B, H, W, 2); channel 0 holds -1 events, channel 1 holds +1."""

    counts: np.ndarray

    @property
    def n_bins(self):
        return self.counts.shape[0]

    def normalized(self) -> np.ndarray:
        peak = self.counts.max() if self.counts.size else 0
        out = self.counts.astype(np.float64)
        return out / peak if peak > 0 else out


def bin_events(stream: EventStream, n_bins: int = 16, T=None) -> BinnedGrid:
    """Histogram events into ``n_bins`` equal time bins over [0, T]."""
    if int(n_bins) != n_bins or n_bins < 1:
        raise BadBinCount(f"bin count must be an integer >= 1, got {n_bins}")
    n_bins = int(n_bins)
    T = stream.T if T is None else T
    H, W = stream.geometry.shape
    counts = np.zeros((n_bins, H, W, 2), dtype=np.int64)
    if len(stream):
        if T > 0:
            b = np.minimum(stream.t * n_bins // T, n_bins - 1)
        else:
            b = np.zeros(len(stream), dtype=np.int64)
        np.add.at(counts, (b, stream.y, stream.x, (stream.p > 0).astype(np.int64)), 1)
    return BinnedGrid(counts)


def rmse(a: EventStream, b: EventStream, n_bins: int = 16) -> float:
    """RMSE between the max-normalized binned grids of two equal-size streams."""
    if a.geometry != b.geometry:
        raise GeometryMismatch(f"cannot compare {a.geometry} with {b.geometry}")
    T = max(a.T, b.T)
    ga = bin_events(a, n_bins, T).normalized()
    gb = bin_events(b, n_bins, T).normalized()
    return float(np.sqrt(np.mean((ga - gb) ** 2)))


def stats(stream: EventStream) -> dict:
    n = len(stream)
    counts = pixel_counts(stream)
    n_pos = int((stream.p > 0).sum())
    n_neg = n - n_pos
    L = int(counts.max()) if n else 0
    hist = np.bincount(counts.ravel(), minlength=L + 1)
    return {
        "events": n,
        "events_per_s": (n / (stream.T * 1e-6)) if stream.T > 0 else 0.0,
        "positive": n_pos,
        "negative": n_neg,
        "polarity_ratio": (n_pos / n_neg) if n_neg else (float("inf") if n_pos else 0.0),
        "active_pixels": int((counts > 0).sum()),
        "L": L,
        "count_histogram": hist.tolist(),
        "width": stream.geometry.width,
        "height": stream.geometry.height,
        "T_us": stream.T,
    }
