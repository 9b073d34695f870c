"""Temporal branch: an MLP regressing each pixel's normalized timestamps.

Features are ``[x, y, column...]`` where (x, y) are normalized positions in the
LR frame. An SR pixel ``xs`` at scale ``s`` sits at LR position ``xs / s``,
so SR pixel ``s * x`` coincides with LR pixel ``x`` and the pixels between two
LR neighbours interpolate between them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
import torch
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import nn
from .events import EventStream, SensorGeometry
from .exceptions import BadPosition, NonFiniteLoss, ShapeMismatch, SourceMismatch
from .spatial import TrainingRecord
from .voxel import VoxelGrid, clamp, decoded_lengths


@dataclass
class TemporalConfig:
    epochs: int = 1000
    lr: float = 1e-3
    seed: int = 0
    batch: Optional[int] = None
    hidden: int = 128
    n_hidden: int = 9
    dtype: str = "float32"
    decay: str = "plateau"
    milestones: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")


@dataclass
class TemporalModel:
    net: nn.Network
    config: TemporalConfig
    lr_geometry: SensorGeometry
    depth: int
    history: List[TrainingRecord] = field(default_factory=list)

    @property
    def losses(self):
        return [r.loss for r in self.history]


@dataclass(frozen=True)
class TimestampField:
    """Normalized timestamps ``values`` (L, H, W) valid below ``counts`` (H, W)."""

    values: np.ndarray
    counts: np.ndarray

    def at(self, x, y):
        return self.values[: self.counts[y, x], y, x]


def encode_features(column, pos) -> np.ndarray:
    """Stack a normalized position and a voxel column into one vector."""
    x, y = pos
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise BadPosition(f"position {pos} outside [0, 1]^2")
    return np.concatenate([[float(x), float(y)], np.asarray(column, dtype=float).ravel()])


def frame_positions(shape, scale, lr_geometry: SensorGeometry):
    """Normalized LR-frame (x, y) of every pixel of an (H, W) grid at ``scale``.

    Positions past the last LR pixel are clamped to 1.
    """
    H, W = shape
    sx = max(lr_geometry.width - 1, 1)
    sy = max(lr_geometry.height - 1, 1)
    xs = np.clip(np.arange(W) / scale / sx, 0.0, 1.0) if lr_geometry.width > 1 else np.zeros(W)
    ys = np.clip(np.arange(H) / scale / sy, 0.0, 1.0) if lr_geometry.height > 1 else np.zeros(H)
    return np.meshgrid(xs, ys)


def feature_matrix(data, px, py, rows, cols):
    """Features for the selected pixels: (n, L + 2)."""
    return np.concatenate(
        [px[rows, cols][:, None], py[rows, cols][:, None], data[:, rows, cols].T], axis=1
    )


def timestamp_targets(stream: EventStream, depth: int):
    """Normalized per-depth timestamps (L, H, W) and the mask of real events."""
    H, W = stream.geometry.shape
    targets = np.zeros((depth, H, W))
    mask = np.zeros((depth, H, W), dtype=bool)
    if len(stream):
        key = stream.y * W + stream.x
        order = np.argsort(key, kind="stable")
        k = key[order]
        first = np.r_[True, k[1:] != k[:-1]]
        start = np.maximum.accumulate(np.where(first, np.arange(len(k)), 0))
        d = np.arange(len(k)) - start
        scale = stream.T if stream.T > 0 else 1
        targets[d, stream.y[order], stream.x[order]] = stream.t[order] / scale
        mask[d, stream.y[order], stream.x[order]] = True
    return targets, mask


def train_temporal(stream: EventStream, grid: VoxelGrid, cfg: TemporalConfig = None,
                   callback: Optional[Callable] = None) -> TemporalModel:
    """Fit the MLP on every non-empty LR pixel with masked MSE."""
    cfg = cfg or TemporalConfig()
    if stream.geometry != grid.geometry:
        raise SourceMismatch(f"stream is {stream.geometry}, grid is {grid.geometry}")
    L = grid.L
    counts = grid.fill_counts
    if not len(stream) or L == 0:
        raise SourceMismatch("cannot train the temporal branch without events")
    if counts.sum() != len(stream):
        raise SourceMismatch("grid event counts do not match the stream")
    targets, mask = timestamp_targets(stream, L)
    px, py = frame_positions(grid.geometry.shape, 1, grid.geometry)
    rows, cols = np.nonzero(counts)
    net = nn.Network(nn.temporal_network(L, cfg.hidden, cfg.n_hidden), seed=cfg.seed, dtype=cfg.dtype)
    X = torch.as_tensor(feature_matrix(grid.data, px, py, rows, cols), dtype=net.dtype)
    Y = torch.as_tensor(targets[:, rows, cols].T, dtype=net.dtype)
    M = torch.as_tensor(mask[:, rows, cols].T, dtype=net.dtype)
    model = TemporalModel(net, cfg, grid.geometry, L)
    state = nn.AdamState(lr=cfg.lr)
    schedule = nn.make_schedule(cfg.decay, cfg.milestones)
    params = net.params
    n = len(rows)
    batch = n if not cfg.batch else min(cfg.batch, n)
    gen = torch.Generator().manual_seed(int(cfg.seed))
    for epoch in range(1, cfg.epochs + 1):
        order = torch.randperm(n, generator=gen) if batch < n else None
        total = 0.0
        for start in range(0, n, batch):
            idx = slice(None) if order is None else order[start:start + batch]
            m = M[idx]
            if m.sum() == 0:
                continue
            loss = nn.mse_loss(nn.forward(net, X[idx], check=False), Y[idx], m)
            grads = nn.backward(net, loss)
            nn.adam_step(state, params, grads)
            total += float(loss.detach()) * float(m.sum())
        value = total / float(M.sum())
        if not math.isfinite(value):
            raise NonFiniteLoss(f"temporal loss became {value} at epoch {epoch}", model.history)
        record = TrainingRecord(epoch, value, state.lr)
        model.history.append(record)
        if callback is not None:
            callback(record)
        schedule.update(state, value)
    return model


def predict_timestamps(model: TemporalModel, sr_grid: VoxelGrid, T=None) -> TimestampField:
    """Normalized timestamps for every decoded SR event, clamped to [0, 1].

    ``T`` is accepted for interface symmetry; de-normalization happens at assembly.
    """
    if sr_grid.L != model.depth:
        raise ShapeMismatch(f"SR grid depth {sr_grid.L} differs from trained depth {model.depth}")
    scale = sr_grid.geometry.width // model.lr_geometry.width
    H, W = sr_grid.geometry.shape
    data = clamp(sr_grid.data, sr_grid.coding)
    counts = decoded_lengths(data, sr_grid.coding)
    values = np.zeros((sr_grid.L, H, W))
    rows, cols = np.nonzero(counts)
    if len(rows):
        px, py = frame_positions((H, W), scale, model.lr_geometry)
        X = torch.as_tensor(feature_matrix(data, px, py, rows, cols), dtype=model.net.dtype)
        with torch.no_grad():
            out = nn.forward(model.net, X).to(torch.float64).numpy()
        values[:, rows, cols] = np.clip(out, 0.0, 1.0).T
    return TimestampField(values, counts)


class TimestampRegressor(BaseEstimator):
    """Estimator wrapper around :func:`train_temporal` / :func:`predict_timestamps`."""

    def __init__(self, epochs=1000, lr=1e-3, seed=0, batch=None, hidden=128, n_hidden=9,
                 dtype="float32", decay="plateau"):
        self.epochs = epochs
        self.lr = lr
        self.seed = seed
        self.batch = batch
        self.hidden = hidden
        self.n_hidden = n_hidden
        self.dtype = dtype
        self.decay = decay

    def fit(self, stream, grid):
        self.model_ = train_temporal(stream, grid, TemporalConfig(**self.get_params()))
        self.loss_history_ = self.model_.losses
        return self

    def predict(self, sr_grid):
        check_is_fitted(self, "model_")
        return predict_timestamps(self.model_, sr_grid)
