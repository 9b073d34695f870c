"""Declarative layer descriptions for the two network families."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

from ..exceptions import ShapeMismatch


@dataclass(frozen=True)
class Conv3d:
    in_ch: int
    out_ch: int
    kernel: int = 3
    padding: int = 1

    @property
    def n_params(self):
        return self.out_ch * self.in_ch * self.kernel ** 3 + self.out_ch


@dataclass(frozen=True)
class Dense:
    in_features: int
    out_features: int

    @property
    def n_params(self):
        return self.out_features * self.in_features + self.out_features


@dataclass(frozen=True)
class ReLU:
    pass


@dataclass(frozen=True)
class LeakyReLU:
    slope: float = 0.01


@dataclass(frozen=True)
class SaveSkip:
    """Remember the current activation under ``name``."""

    name: str = "input"


@dataclass(frozen=True)
class AddSkip:
    """Add the activation saved under ``name`` to the current one."""

    name: str = "input"


Layer = Union[Conv3d, Dense, ReLU, LeakyReLU, SaveSkip, AddSkip]
PARAMETRIC = (Conv3d, Dense)


@dataclass(frozen=True)
class NetworkSpec:
    layers: Tuple[Layer, ...]
    kind: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        self.check()

    def check(self):
        """Verify that consecutive parametric layers have compatible widths."""
        width = None
        saved = {}
        for i, layer in enumerate(self.layers):
            if isinstance(layer, Conv3d):
                w_in = layer.in_ch
                w_out = layer.out_ch
            elif isinstance(layer, Dense):
                w_in = layer.in_features
                w_out = layer.out_features
            elif isinstance(layer, SaveSkip):
                saved[layer.name] = width
                continue
            elif isinstance(layer, AddSkip):
                if layer.name not in saved:
                    raise ShapeMismatch(f"layer {i}: skip {layer.name!r} added before it was saved")
                if saved[layer.name] is not None and width is not None and saved[layer.name] != width:
                    raise ShapeMismatch(
                        f"layer {i}: skip {layer.name!r} has width {saved[layer.name]}, current is {width}"
                    )
                continue
            else:
                continue
            if width is not None and w_in != width:
                raise ShapeMismatch(f"layer {i}: expects width {w_in}, previous layer gives {width}")
            width = w_out

    @property
    def parametric(self):
        return [l for l in self.layers if isinstance(l, PARAMETRIC)]

    @property
    def n_params(self):
        return sum(l.n_params for l in self.parametric)

    @property
    def in_width(self):
        first = self.parametric[0]
        return first.in_ch if isinstance(first, Conv3d) else first.in_features

    @property
    def out_width(self):
        last = self.parametric[-1]
        return last.out_ch if isinstance(last, Conv3d) else last.out_features


def spatial_network(hidden=32, n_conv=8, kernel=3) -> NetworkSpec:
    """Residual 3D CNN over a single-channel (L, H, W) volume."""
    pad = kernel // 2
    layers = [SaveSkip("input"), Conv3d(1, hidden, kernel, pad), ReLU()]
    for _ in range(n_conv - 2):
        layers += [Conv3d(hidden, hidden, kernel, pad), ReLU()]
    layers += [Conv3d(hidden, 1, kernel, pad), AddSkip("input")]
    return NetworkSpec(tuple(layers), kind="spatial")


def temporal_network(depth_L, hidden=128, n_hidden=9) -> NetworkSpec:
    """MLP from ``[x, y, column]`` (L + 2 values) to L normalized timestamps."""
    layers = [Dense(depth_L + 2, hidden), ReLU()]
    for _ in range(n_hidden - 1):
        layers += [Dense(hidden, hidden), ReLU()]
    layers.append(Dense(hidden, depth_L))
    return NetworkSpec(tuple(layers), kind="temporal")
