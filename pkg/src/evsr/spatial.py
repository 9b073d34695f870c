"""Spatial branch: test-time training of a residual 3D CNN on a grid's own cross-scale pairs."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, List, NamedTuple, Optional, Tuple

import numpy as np
import torch
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import nn
from .exceptions import GridTooSmall, NonFiniteLoss, ScaleMismatch
from .resample import as_kernel, augment, degrade, upsample_naive
from .voxel import VoxelGrid, clamp


class TrainingRecord(NamedTuple):
    step: int
    loss: float
    lr: float


@dataclass
class SpatialConfig:
    scale: int = 2
    iterations: int = 1000
    lr: float = 1e-3
    kernel: str = "bicubic"
    augment: bool = True
    seed: int = 0
    hidden: int = 32
    n_conv: int = 8
    dtype: str = "float32"
    decay: str = "plateau"
    milestones: Tuple[int, ...] = ()
    tol: float = 0.0
    patch: int = 64
    patch_above: int = 128
    min_size: int = 4

    def __post_init__(self):
        if int(self.scale) != self.scale or self.scale < 1:
            raise ValueError(f"scale must be an integer >= 1, got {self.scale}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")


@dataclass
class SpatialModel:
    net: nn.Network
    config: SpatialConfig
    history: List[TrainingRecord] = field(default_factory=list)

    @property
    def losses(self):
        return [r.loss for r in self.history]


def training_pairs(data, cfg: SpatialConfig):
    """(input, target) volumes: the degraded grid against the grid itself, plus augmentations."""
    kernel = as_kernel(cfg.kernel, cfg.seed)
    lr_in = degrade(data, cfg.scale, kernel)
    if cfg.augment:
        return augment(lr_in, data)
    return [(lr_in, np.array(data, copy=True))]


def _batches(pairs, dtype):
    """Stack pairs that share a shape into (N, 1, L, H, W) tensors."""
    groups = {}
    for lr_in, hr in pairs:
        groups.setdefault(lr_in.shape, []).append((lr_in, hr))
    out = []
    for shape in sorted(groups):
        items = groups[shape]
        x = torch.as_tensor(np.stack([a for a, _ in items])[:, None], dtype=dtype)
        y = torch.as_tensor(np.stack([b for _, b in items])[:, None], dtype=dtype)
        out.append((x, y))
    return out


def _crop(batches, cfg: SpatialConfig, rng):
    out = []
    for x, y in batches:
        H, W = x.shape[-2:]
        if max(H, W) <= cfg.patch_above:
            out.append((x, y))
            continue
        ph, pw = min(cfg.patch, H), min(cfg.patch, W)
        i = int(rng.integers(0, H - ph + 1))
        j = int(rng.integers(0, W - pw + 1))
        out.append((x[..., i:i + ph, j:j + pw], y[..., i:i + ph, j:j + pw]))
    return out


def train_spatial(grid: VoxelGrid, cfg: SpatialConfig = None, callback: Optional[Callable] = None) -> SpatialModel:
    """Fit the spatial network on (degraded grid, grid) pairs with L1 loss.

    Training stops after ``cfg.iterations`` steps or as soon as the loss
    falls to ``cfg.tol``.
    """
    cfg = cfg or SpatialConfig()
    if grid.L == 0:
        raise GridTooSmall("cannot train on an empty voxel grid")
    H, W = grid.geometry.shape
    if -(-H // cfg.scale) < cfg.min_size or -(-W // cfg.scale) < cfg.min_size:
        raise GridTooSmall(
            f"{W}x{H} grid downsampled by {cfg.scale} is below the {cfg.min_size}x{cfg.min_size} minimum"
        )
    spec = nn.spatial_network(cfg.hidden, cfg.n_conv)
    net = nn.Network(spec, seed=cfg.seed, dtype=cfg.dtype, init_last="zero")
    batches = _batches(training_pairs(grid.data, cfg), net.dtype)
    n_total = sum(y.numel() for _, y in batches)
    rng = np.random.default_rng(cfg.seed)
    state = nn.AdamState(lr=cfg.lr)
    schedule = nn.make_schedule(cfg.decay, cfg.milestones)
    model = SpatialModel(net, cfg)
    params = net.params
    for step in range(1, cfg.iterations + 1):
        loss = 0.0
        for x, y in _crop(batches, cfg, rng):
            out = nn.forward(net, x, check=False)
            # weight each shape group by its share of voxels so the total is a plain mean
            loss = loss + nn.l1_loss(out, y) * (y.numel() / n_total)
        value = float(loss.detach())
        if not math.isfinite(value):
            raise NonFiniteLoss(f"spatial loss became {value} at step {step}", model.history)
        record = TrainingRecord(step, value, state.lr)
        model.history.append(record)
        if callback is not None:
            callback(record)
        if value <= cfg.tol:
            break
        grads = nn.backward(net, loss)
        nn.adam_step(state, params, grads)
        schedule.update(state, value)
    return model


def infer_spatial(model: SpatialModel, grid: VoxelGrid, scale: int = None) -> VoxelGrid:
    """Super-resolve ``grid`` by ``scale``; depth is unchanged and values are clamped to the codes."""
    scale = model.config.scale if scale is None else scale
    if scale != model.config.scale:
        raise ScaleMismatch(f"model trained for x{model.config.scale}, asked for x{scale}")
    geo = grid.geometry.scaled(scale)
    if grid.L == 0:
        return VoxelGrid(np.zeros((0,) + geo.shape), geo, grid.coding)
    up = upsample_naive(grid.data, scale, "bicubic")
    net = model.net
    with torch.no_grad():
        x = torch.as_tensor(up[None, None], dtype=net.dtype)
        out = nn.forward(net, x)[0, 0].to(torch.float64).numpy()
    return VoxelGrid(clamp(out, grid.coding), geo, grid.coding)


class SpatialSuperResolver(BaseEstimator):
    """Estimator wrapper: ``fit(grid)`` trains at test time, ``predict(grid)`` super-resolves."""

    def __init__(self, scale=2, iterations=1000, lr=1e-3, kernel="bicubic", augment=True, seed=0,
                 hidden=32, n_conv=8, dtype="float32", decay="plateau", tol=0.0):
        self.scale = scale
        self.iterations = iterations
        self.lr = lr
        self.kernel = kernel
        self.augment = augment
        self.seed = seed
        self.hidden = hidden
        self.n_conv = n_conv
        self.dtype = dtype
        self.decay = decay
        self.tol = tol

    def _config(self):
        return SpatialConfig(**self.get_params())

    def fit(self, grid, y=None):
        self.model_ = train_spatial(grid, self._config())
        self.loss_history_ = self.model_.losses
        return self

    def predict(self, grid):
        check_is_fitted(self, "model_")
        return infer_spatial(self.model_, grid, self.scale)


def config_dict(cfg) -> dict:
    return asdict(cfg)
