"""Synthetic event streams from moving patterns, and stream-level down/upsampling.

The simulator point-samples a piecewise-constant intensity pattern at pixel
centers, tracks each pixel's log intensity against a reference level and
emits one event per contrast-threshold crossing. There is no noise model.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .events import EventStream, SensorGeometry
from .exceptions import BadFactor

PATTERNS = ("bar", "checkerboard", "disk", "ramp")


class DegenerateMotionWarning(UserWarning):
    """A static scene produced no events."""


@dataclass(frozen=True)
class SynthConfig:
    """Moving-pattern scene.

    ``velocity`` is in pixels per millisecond, ``duration`` in milliseconds,
    ``dt`` (simulation step) in microseconds. ``size`` is the bar width,
    checker square side, disk radius or ramp length in pixels.
    """

    pattern: str = "bar"
    geometry: SensorGeometry = field(default_factory=lambda: SensorGeometry(32, 32))
    velocity: Tuple[float, float] = (1.0, 0.0)
    duration: float = 10.0
    contrast: float = 0.2
    dt: float = 10.0
    size: float = 6.0
    position: Optional[Tuple[float, float]] = None
    low: float = 0.2
    high: float = 1.0

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise ValueError(f"unknown pattern {self.pattern!r}; expected one of {PATTERNS}")
        if self.contrast <= 0:
            raise ValueError("contrast threshold must be positive")
        if self.dt <= 0:
            raise ValueError("time step must be positive")
        if self.duration < 0:
            raise ValueError("duration must be non-negative")
        if not (0 < self.low and 0 < self.high):
            raise ValueError("intensities must be positive")
        travel = math.hypot(*self.velocity) * self.duration
        span = math.hypot(self.geometry.width, self.geometry.height)
        if travel > span:
            raise ValueError(f"motion of {travel:.1f} px exceeds the {span:.1f} px field of view")

    @property
    def duration_us(self):
        return int(round(self.duration * 1000))

    def start(self):
        if self.position is not None:
            return tuple(float(v) for v in self.position)
        W, H = self.geometry.width, self.geometry.height
        if self.pattern == "disk":
            return (W / 2.0, H / 2.0)
        if self.pattern == "bar":
            return (2.0, 0.0)
        return (0.0, 0.0)


def log_intensity(cfg: SynthConfig, t_ms: float) -> np.ndarray:
    """Log intensity image (H, W) at time ``t_ms``."""
    H, W = cfg.geometry.shape
    cy, cx = np.mgrid[0:H, 0:W] + 0.5
    x0, y0 = cfg.start()
    vx, vy = cfg.velocity
    u = cx - (x0 + vx * t_ms)
    v = cy - (y0 + vy * t_ms)
    lo, hi = math.log(cfg.low), math.log(cfg.high)
    if cfg.pattern == "bar":
        inside = (u >= 0) & (u < cfg.size)
        return np.where(inside, hi, lo)
    if cfg.pattern == "checkerboard":
        parity = (np.floor(u / cfg.size) + np.floor(v / cfg.size)) % 2
        return np.where(parity == 0, hi, lo)
    if cfg.pattern == "disk":
        return np.where(u ** 2 + v ** 2 <= cfg.size ** 2, hi, lo)
    return lo + (hi - lo) * np.clip(u / cfg.size, 0.0, 1.0)


def simulate(cfg: SynthConfig) -> EventStream:
    """Render the scene step by step and emit threshold-crossing events."""
    n_steps = int(round(cfg.duration_us / cfg.dt))
    ref = log_intensity(cfg, 0.0)
    xs, ys, ts, ps = [], [], [], []
    for k in range(1, n_steps + 1):
        t_us = int(round(k * cfg.dt))
        diff = log_intensity(cfg, t_us / 1000.0) - ref
        # small slack so that exact multiples of c are counted as crossings
        n = np.floor(np.abs(diff) / cfg.contrast + 1e-9).astype(np.int64)
        if not n.any():
            continue
        sign = np.sign(diff).astype(np.int64)
        ref = ref + sign * n * cfg.contrast
        yy, xx = np.nonzero(n)
        reps = n[yy, xx]
        xs.append(np.repeat(xx, reps))
        ys.append(np.repeat(yy, reps))
        ts.append(np.full(reps.sum(), t_us, dtype=np.int64))
        ps.append(np.repeat(sign[yy, xx], reps))
    if xs:
        stream = EventStream.from_arrays(
            cfg.geometry, np.concatenate(xs), np.concatenate(ys), np.concatenate(ts),
            np.concatenate(ps), cfg.duration_us,
        )
    else:
        stream = EventStream.from_arrays(cfg.geometry, [], [], [], [], cfg.duration_us)
    if not len(stream) and cfg.duration > 0 and math.hypot(*cfg.velocity) == 0:
        warnings.warn("static pattern: no events generated", DegenerateMotionWarning, stacklevel=2)
    return stream


def downsample_stream(hr: EventStream, factor: int, refractory_us: float = 100) -> EventStream:
    """Bin events into ``factor`` x ``factor`` blocks and merge refractory repeats.

    Within one LR pixel and polarity, an event closer than ``refractory_us``
    to the last kept event is dropped (the earliest timestamp survives).
    """
    if int(factor) != factor or factor < 1:
        raise BadFactor(f"scale factor must be an integer >= 1, got {factor}")
    factor = int(factor)
    W = -(-hr.geometry.width // factor)
    H = -(-hr.geometry.height // factor)
    geo = SensorGeometry(W, H)
    x = hr.x // factor
    y = hr.y // factor
    if not len(hr):
        return EventStream.from_arrays(geo, [], [], [], [], hr.T)
    order = np.lexsort((hr.t, hr.p, y * W + x))
    x, y, t, p = x[order], y[order], hr.t[order], hr.p[order]
    group = (y * W + x) * 2 + (p > 0)
    keep = np.zeros(len(t), dtype=bool)
    last_group = -1
    last_t = 0
    for i in range(len(t)):
        g = group[i]
        if g != last_group or t[i] - last_t >= refractory_us:
            keep[i] = True
            last_group = g
            last_t = t[i]
    return EventStream.from_arrays(geo, x[keep], y[keep], t[keep], p[keep], hr.T)


def upsample_stream_nearest(lr: EventStream, factor: int) -> EventStream:
    """Naive baseline: copy every event to all ``factor``**2 subpixels of its block."""
    if int(factor) != factor or factor < 1:
        raise BadFactor(f"scale factor must be an integer >= 1, got {factor}")
    factor = int(factor)
    dy, dx = np.mgrid[0:factor, 0:factor]
    dx = dx.ravel()
    dy = dy.ravel()
    x = (lr.x[:, None] * factor + dx[None, :]).ravel()
    y = (lr.y[:, None] * factor + dy[None, :]).ravel()
    rep = factor * factor
    return EventStream.from_arrays(
        lr.geometry.scaled(factor), x, y, np.repeat(lr.t, rep), np.repeat(lr.p, rep), lr.T
    )
