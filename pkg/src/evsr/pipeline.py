"""Fusing the spatial and temporal outputs into an SR stream, and the end-to-end pipeline."""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .events import EventStream, SensorGeometry
from .exceptions import EvsrError, FieldMismatch, PipelineError
from .spatial import SpatialConfig, infer_spatial, train_spatial
from .temporal import TemporalConfig, TimestampField, predict_timestamps, train_temporal
from .validation import check_scale, check_stream
from .voxel import VoxelCoding, VoxelGrid, decode_polarities, encode


@dataclass
class SRResult:
    stream: EventStream
    diagnostics: dict = field(default_factory=dict)
    lr_grid: VoxelGrid = None
    sr_grid: VoxelGrid = None
    timestamps: TimestampField = None
    spatial_model: object = None
    temporal_model: object = None


def round_half_up(v):
    return np.floor(np.asarray(v, dtype=np.float64) + 0.5).astype(np.int64)


def assemble(sr_grid: VoxelGrid, ts: TimestampField, T, geometry_out: SensorGeometry = None) -> EventStream:
    """Emit one event per decoded SR voxel, timed by the timestamp field."""
    geometry_out = geometry_out or sr_grid.geometry
    if geometry_out != sr_grid.geometry:
        raise FieldMismatch(f"output geometry {geometry_out} differs from grid {sr_grid.geometry}")
    if ts.values.shape != sr_grid.data.shape:
        raise FieldMismatch(f"timestamp field {ts.values.shape} does not cover grid {sr_grid.data.shape}")
    if T <= 0:
        raise FieldMismatch("T must be positive")
    pol = decode_polarities(sr_grid.data, sr_grid.coding)
    counts = ts.counts
    depth = np.arange(sr_grid.L)[:, None, None]
    live = (depth < counts[None]) & (pol != 0)
    d, y, x = np.nonzero(live)
    t = np.clip(round_half_up(ts.values[d, y, x] * T), 0, T)
    return EventStream.from_arrays(geometry_out, x, y, t, pol[d, y, x], T)


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except EvsrError as exc:
        raise PipelineError(name, exc) from exc


def super_resolve(stream: EventStream, scale: int, spatial_cfg: SpatialConfig = None,
                  temporal_cfg: TemporalConfig = None, coding: VoxelCoding = VoxelCoding(),
                  callback=None) -> SRResult:
    """encode -> train/infer spatial -> train/predict temporal -> assemble."""
    scale = check_scale(scale)
    stream = check_stream(stream, allow_empty=False)
    spatial_cfg = replace(spatial_cfg or SpatialConfig(), scale=scale)
    temporal_cfg = temporal_cfg or TemporalConfig()
    timings = {}

    def timed(name, fn, *args, **kwargs):
        t0 = time.perf_counter()
        out = _stage(name, fn, *args, **kwargs)
        timings[name] = time.perf_counter() - t0
        return out

    spatial_log = None if callback is None else (lambda r: callback("spatial", r))
    temporal_log = None if callback is None else (lambda r: callback("temporal", r))
    grid = timed("encode", encode, stream, coding)
    fv = timed("train_spatial", train_spatial, grid, spatial_cfg, spatial_log)
    sr_grid = timed("infer_spatial", infer_spatial, fv, grid, scale)
    ft = timed("train_temporal", train_temporal, stream, grid, temporal_cfg, temporal_log)
    ts = timed("predict_timestamps", predict_timestamps, ft, sr_grid, stream.T)
    out = timed("assemble", assemble, sr_grid, ts, stream.T, stream.geometry.scaled(scale))
    diagnostics = {
        "scale": scale,
        "lr_width": stream.geometry.width,
        "lr_height": stream.geometry.height,
        "sr_width": out.geometry.width,
        "sr_height": out.geometry.height,
        "T_us": stream.T,
        "lr_events": len(stream),
        "sr_events": len(out),
        "depth_L": grid.L,
        "spatial_iterations": len(fv.history),
        "spatial_loss_initial": fv.history[0].loss,
        "spatial_loss_final": fv.history[-1].loss,
        "spatial_lr_final": fv.history[-1].lr,
        "temporal_epochs": len(ft.history),
        "temporal_loss_initial": ft.history[0].loss,
        "temporal_loss_final": ft.history[-1].loss,
        "temporal_lr_final": ft.history[-1].lr,
        "seed_spatial": spatial_cfg.seed,
        "seed_temporal": temporal_cfg.seed,
    }
    diagnostics.update({f"time_{k}_s": v for k, v in timings.items()})
    diagnostics.update({f"spatial_cfg.{k}": v for k, v in asdict(spatial_cfg).items()})
    diagnostics.update({f"temporal_cfg.{k}": v for k, v in asdict(temporal_cfg).items()})
    return SRResult(out, diagnostics, grid, sr_grid, ts, fv, ft)


class EventSuperResolver(BaseEstimator, TransformerMixin):
    """Self-supervised spatiotemporal super-resolution of one event stream.

    Parameters
    ----------
    scale : int
        Integer spatial upscaling factor.
    iterations : int
        Spatial training steps.
    epochs : int
        Temporal training epochs.
    lr : float
        Initial learning rate for both branches.
    kernel : {"bicubic", "bilinear", "random", "box"}
        Degradation used to build the spatial training pairs.
    seed : int
        Seeds network initialization, crops and the random kernel.

    Both networks are trained on the input itself, so ``fit`` and
    ``transform`` are meant for the same stream; ``fit_transform`` is the
    usual entry point.
    """

    def __init__(self, scale=2, iterations=1000, epochs=1000, lr=1e-3, kernel="bicubic",
                 augment=True, seed=0, dtype="float32", hidden=32, mlp_hidden=128):
        self.scale = scale
        self.iterations = iterations
        self.epochs = epochs
        self.lr = lr
        self.kernel = kernel
        self.augment = augment
        self.seed = seed
        self.dtype = dtype
        self.hidden = hidden
        self.mlp_hidden = mlp_hidden

    def configs(self):
        spatial = SpatialConfig(scale=self.scale, iterations=self.iterations, lr=self.lr,
                                kernel=self.kernel, augment=self.augment, seed=self.seed,
                                hidden=self.hidden, dtype=self.dtype)
        temporal = TemporalConfig(epochs=self.epochs, lr=self.lr, seed=self.seed,
                                  hidden=self.mlp_hidden, dtype=self.dtype)
        return spatial, temporal

    def fit(self, stream, y=None):
        spatial, temporal = self.configs()
        self.result_ = super_resolve(stream, self.scale, spatial, temporal)
        self.source_ = stream
        return self

    def transform(self, X):
        check_is_fitted(self, "result_")
        if X is not self.source_ and X != self.source_:
            raise ValueError("the fitted networks are specific to the stream they were trained on")
        return self.result_.stream

    def fit_transform(self, stream, y=None, **fit_params):
        return self.fit(stream).transform(stream)
