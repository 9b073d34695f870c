"""Executable networks built from a :class:`NetworkSpec` (torch autograd backend)."""
from __future__ import annotations

import math

import torch

from ..exceptions import NoTrace, NonFiniteActivation, ShapeMismatch
from .spec import AddSkip, Conv3d, Dense, LeakyReLU, NetworkSpec, ReLU, SaveSkip

DTYPES = {"float32": torch.float32, "float64": torch.float64}


def resolve_dtype(dtype):
    if isinstance(dtype, torch.dtype):
        return dtype
    try:
        return DTYPES[dtype]
    except KeyError:
        raise ValueError(f"dtype must be one of {sorted(DTYPES)}, got {dtype!r}") from None


class Network(torch.nn.Module):
    """Interprets a layer list; parameters live in ``weights``/``biases``."""

    def __init__(self, spec: NetworkSpec, seed=0, dtype="float64", init_last="he"):
        super().__init__()
        self.spec = spec
        self.dtype = resolve_dtype(dtype)
        self.weights = torch.nn.ParameterList()
        self.biases = torch.nn.ParameterList()
        gen = torch.Generator().manual_seed(int(seed))
        parametric = spec.parametric
        for i, layer in enumerate(parametric):
            if isinstance(layer, Conv3d):
                shape = (layer.out_ch, layer.in_ch) + (layer.kernel,) * 3
                fan_in = layer.in_ch * layer.kernel ** 3
                n_out = layer.out_ch
            else:
                shape = (layer.out_features, layer.in_features)
                fan_in = layer.in_features
                n_out = layer.out_features
            w = torch.empty(shape, dtype=self.dtype)
            if i == len(parametric) - 1 and init_last == "zero":
                w.zero_()
            else:
                bound = math.sqrt(6.0 / fan_in)
                w.uniform_(-bound, bound, generator=gen)
            self.weights.append(torch.nn.Parameter(w))
            self.biases.append(torch.nn.Parameter(torch.zeros(n_out, dtype=self.dtype)))

    def forward(self, x):
        if x.dtype != self.dtype:
            x = x.to(self.dtype)
        saved = {}
        k = 0
        for layer in self.spec.layers:
            if isinstance(layer, Conv3d):
                if x.dim() != 5 or x.shape[1] != layer.in_ch:
                    raise ShapeMismatch(f"conv3d expects (N, {layer.in_ch}, L, H, W), got {tuple(x.shape)}")
                x = torch.nn.functional.conv3d(x, self.weights[k], self.biases[k], padding=layer.padding)
                k += 1
            elif isinstance(layer, Dense):
                if x.shape[-1] != layer.in_features:
                    raise ShapeMismatch(f"dense expects {layer.in_features} features, got {x.shape[-1]}")
                x = torch.nn.functional.linear(x, self.weights[k], self.biases[k])
                k += 1
            elif isinstance(layer, ReLU):
                x = torch.relu(x)
            elif isinstance(layer, LeakyReLU):
                x = torch.nn.functional.leaky_relu(x, layer.slope)
            elif isinstance(layer, SaveSkip):
                saved[layer.name] = x
            elif isinstance(layer, AddSkip):
                x = x + saved[layer.name]
        return x

    @property
    def params(self):
        return [p for pair in zip(self.weights, self.biases) for p in pair]

    def n_params(self):
        return sum(p.numel() for p in self.params)


def forward(net: Network, x, check=True):
    """Run ``net``; the returned tensor carries the autograd trace."""
    if not torch.is_tensor(x):
        x = torch.as_tensor(x, dtype=net.dtype)
    out = net(x)
    if check and not torch.isfinite(out).all():
        raise NonFiniteActivation("network produced non-finite activations")
    return out


def backward(net: Network, loss, grad=None):
    """Backpropagate ``loss`` and return gradients aligned with ``net.params``."""
    if not torch.is_tensor(loss) or loss.grad_fn is None:
        raise NoTrace("loss has no recorded computation; run forward() with gradients enabled")
    params = net.params
    grads = torch.autograd.grad(loss, params, grad_outputs=grad, allow_unused=True)
    return [torch.zeros_like(p) if g is None else g for p, g in zip(params, grads)]
