"""Spatial resampling of voxel tensors and the rotation/flip augmentation group.

All functions act on the last two axes (H, W) of an array and leave leading
axes (depth, batch) untouched.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import BadFactor

KERNELS = ("bicubic", "bilinear", "random", "box")


@dataclass(frozen=True)
class Kernel:
    kind: str = "bicubic"
    random_seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise ValueError(f"unknown kernel {self.kind!r}; expected one of {KERNELS}")
        if self.kind == "random" and self.random_seed is None:
            raise ValueError("random kernel needs a random_seed")

    def weights(self):
        """The 4x4 blur used by the random kernel."""
        rng = np.random.default_rng(self.random_seed)
        w = rng.random((4, 4))
        return w / w.sum()


def as_kernel(kernel, seed=None) -> Kernel:
    if isinstance(kernel, Kernel):
        return kernel
    if kernel == "random":
        return Kernel("random", 0 if seed is None else seed)
    return Kernel(kernel)


def catmull_rom(d, a=-0.5):
    d = np.abs(np.asarray(d, dtype=float))
    out = np.zeros_like(d)
    near = d <= 1
    far = (d > 1) & (d < 2)
    out[near] = (a + 2) * d[near] ** 3 - (a + 3) * d[near] ** 2 + 1
    out[far] = a * d[far] ** 3 - 5 * a * d[far] ** 2 + 8 * a * d[far] - 4 * a
    return out


def triangle(d):
    return np.clip(1.0 - np.abs(np.asarray(d, dtype=float)), 0.0, None)


def reflect_index(idx, n):
    """Half-sample symmetric reflection (edge sample repeated) into [0, n)."""
    idx = np.asarray(idx)
    if n == 1:
        return np.zeros_like(idx)
    period = 2 * n
    idx = np.mod(idx, period)
    return np.where(idx >= n, period - 1 - idx, idx)


def _interp_matrix(n_in, n_out, kind):
    """(n_out, n_in) weights for pixel-center-aligned interpolation."""
    if kind == "bicubic":
        fn, radius = catmull_rom, 2
    else:
        fn, radius = triangle, 1
    scale = n_in / n_out
    src = (np.arange(n_out) + 0.5) * scale - 0.5
    base = np.floor(src).astype(int)
    offsets = np.arange(-radius + 1, radius + 1)
    taps = base[:, None] + offsets[None, :]
    w = fn(src[:, None] - taps)
    w /= w.sum(axis=1, keepdims=True)
    M = np.zeros((n_out, n_in))
    np.add.at(M, (np.repeat(np.arange(n_out), len(offsets)), reflect_index(taps, n_in).ravel()), w.ravel())
    return M


def _box_matrix(n_in, factor):
    n_out = n_in // factor
    M = np.zeros((n_out, n_in))
    for i in range(n_out):
        M[i, i * factor:(i + 1) * factor] = 1.0 / factor
    return M


def _random_matrices(n_in, factor, taps1d):
    """Row/column sampling matrices for one separable slice of the random blur."""
    n_out = n_in // factor
    start = np.arange(n_out) * factor + (factor - 4) // 2
    M = np.zeros((n_out, n_in))
    for a, w in enumerate(taps1d):
        np.add.at(M, (np.arange(n_out), reflect_index(start + a, n_in)), w)
    return M


def _apply(arr, Mh, Mw):
    out = np.tensordot(arr, Mw, axes=([-1], [1]))
    out = np.moveaxis(np.tensordot(out, Mh, axes=([-2], [1])), -1, -2)
    return out


def _check_factor(factor):
    if int(factor) != factor or factor < 1:
        raise BadFactor(f"scale factor must be an integer >= 1, got {factor}")
    return int(factor)


def pad_to_multiple(arr, factor):
    """Symmetric-pad the spatial axes up to the next multiple of ``factor``."""
    H, W = arr.shape[-2:]
    ph = (-H) % factor
    pw = (-W) % factor
    if not (ph or pw):
        return arr
    pad = [(0, 0)] * (arr.ndim - 2) + [(0, ph), (0, pw)]
    return np.pad(arr, pad, mode="symmetric")


def downsample(arr, factor, kernel="bicubic") -> np.ndarray:
    """Reduce H and W by ``factor``; sizes are padded up to a multiple first."""
    factor = _check_factor(factor)
    kernel = as_kernel(kernel)
    arr = pad_to_multiple(np.asarray(arr, dtype=float), factor)
    H, W = arr.shape[-2:]
    if kernel.kind == "random":
        w = kernel.weights()
        out = 0.0
        # the 4x4 blur is a sum of 4 separable terms (one per row of taps)
        n_out_h = H // factor
        start_h = np.arange(n_out_h) * factor + (factor - 4) // 2
        Mw = [_random_matrices(W, factor, w[a]) for a in range(4)]
        for a in range(4):
            Mh = np.zeros((n_out_h, H))
            Mh[np.arange(n_out_h), reflect_index(start_h + a, H)] = 1.0
            out = out + _apply(arr, Mh, Mw[a])
        return out
    if factor == 1:
        return arr.copy()
    if kernel.kind == "box":
        return _apply(arr, _box_matrix(H, factor), _box_matrix(W, factor))
    return _apply(arr, _interp_matrix(H, H // factor, kernel.kind), _interp_matrix(W, W // factor, kernel.kind))


def upsample_naive(arr, factor, mode="nearest") -> np.ndarray:
    """Enlarge H and W by ``factor`` with pixel replication or Catmull-Rom bicubic."""
    factor = _check_factor(factor)
    arr = np.asarray(arr, dtype=float)
    if factor == 1:
        return arr.copy()
    if mode == "nearest":
        return np.repeat(np.repeat(arr, factor, axis=-2), factor, axis=-1)
    if mode not in ("bicubic", "bilinear"):
        raise ValueError(f"unknown upsampling mode {mode!r}")
    H, W = arr.shape[-2:]
    return _apply(arr, _interp_matrix(H, H * factor, mode), _interp_matrix(W, W * factor, mode))


def degrade(arr, factor, kernel="bicubic") -> np.ndarray:
    """Downsample then bicubically re-upsample, cropped to the input size."""
    H, W = np.shape(arr)[-2:]
    low = downsample(arr, factor, kernel)
    return upsample_naive(low, factor, "bicubic")[..., :H, :W]


TRANSFORMS = ("identity", "rot90", "rot180", "rot270", "hflip", "vflip")


def apply_transform(arr, name):
    if name == "identity":
        return np.array(arr, copy=True)
    if name.startswith("rot"):
        return np.rot90(arr, int(name[3:]) // 90, axes=(-2, -1)).copy()
    if name == "hflip":
        return np.flip(arr, axis=-1).copy()
    if name == "vflip":
        return np.flip(arr, axis=-2).copy()
    raise ValueError(f"unknown transform {name!r}")


def invert_transform(arr, name):
    inverse = {"rot90": "rot270", "rot270": "rot90"}.get(name, name)
    return apply_transform(arr, inverse)


def augment(lr, hr):
    """The original pair plus its 3 rotations and 2 mirror images (6 pairs)."""
    return [(apply_transform(lr, name), apply_transform(hr, name)) for name in TRANSFORMS]
