"""Flat little-endian parameter checkpoints.

Layout::

    b"EVNN"  u16 version=1  u16 dtype (0 float32, 1 float64)
    u32 n_layers, then per layer:
        u8 kind  u32 a  u32 b  u32 kernel  u32 padding  f64 slope  u16 name_len  name (utf-8)
    u32 n_arrays, then per array:
        u8 ndim  u32 dims[ndim]  raw values (little-endian)

Arrays alternate weight, bias for each parametric layer in order.
"""
import struct

import numpy as np
import torch

from ..exceptions import MagicMismatch, TruncatedFile
from .network import Network
from .spec import AddSkip, Conv3d, Dense, LeakyReLU, NetworkSpec, ReLU, SaveSkip

MAGIC = b"EVNN"
VERSION = 1
_KINDS = {Conv3d: 1, Dense: 2, ReLU: 3, LeakyReLU: 4, SaveSkip: 5, AddSkip: 6}
_LAYER = struct.Struct("<BIIIId")


def _layer_record(layer):
    a = b = k = pad = 0
    slope = 0.0
    name = b""
    if isinstance(layer, Conv3d):
        a, b, k, pad = layer.in_ch, layer.out_ch, layer.kernel, layer.padding
    elif isinstance(layer, Dense):
        a, b = layer.in_features, layer.out_features
    elif isinstance(layer, LeakyReLU):
        slope = layer.slope
    elif isinstance(layer, (SaveSkip, AddSkip)):
        name = layer.name.encode()
    return _LAYER.pack(_KINDS[type(layer)], a, b, k, pad, slope) + struct.pack("<H", len(name)) + name


def _layer_from(kind, a, b, k, pad, slope, name):
    if kind == 1:
        return Conv3d(a, b, k, pad)
    if kind == 2:
        return Dense(a, b)
    if kind == 3:
        return ReLU()
    if kind == 4:
        return LeakyReLU(slope)
    if kind == 5:
        return SaveSkip(name)
    if kind == 6:
        return AddSkip(name)
    raise MagicMismatch(f"unknown layer kind {kind}")


def save_checkpoint(net: Network, path):
    dcode = 1 if net.dtype == torch.float64 else 0
    np_dtype = "<f8" if dcode else "<f4"
    chunks = [MAGIC, struct.pack("<HH", VERSION, dcode), struct.pack("<I", len(net.spec.layers))]
    chunks += [_layer_record(layer) for layer in net.spec.layers]
    arrays = [p.detach().cpu().numpy() for p in net.params]
    chunks.append(struct.pack("<I", len(arrays)))
    for a in arrays:
        chunks.append(struct.pack("<B", a.ndim) + struct.pack(f"<{a.ndim}I", *a.shape))
        chunks.append(np.ascontiguousarray(a, dtype=np_dtype).tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(chunks))


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise TruncatedFile(f"checkpoint ends at byte {len(self.data)}, needed {self.pos + n}")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt):
        s = struct.Struct(fmt)
        return s.unpack(self.take(s.size))


def load_checkpoint(path) -> Network:
    with open(path, "rb") as fh:
        r = _Reader(fh.read())
    if r.take(4) != MAGIC:
        raise MagicMismatch("not an evsr checkpoint")
    version, dcode = r.unpack("<HH")
    if version != VERSION:
        raise MagicMismatch(f"unsupported checkpoint version {version}")
    (n_layers,) = r.unpack("<I")
    layers = []
    for _ in range(n_layers):
        kind, a, b, k, pad, slope = r.unpack(_LAYER.format)
        (name_len,) = r.unpack("<H")
        name = r.take(name_len).decode()
        layers.append(_layer_from(kind, a, b, k, pad, slope, name))
    spec = NetworkSpec(tuple(layers))
    net = Network(spec, dtype="float64" if dcode else "float32")
    np_dtype = "<f8" if dcode else "<f4"
    (n_arrays,) = r.unpack("<I")
    if n_arrays != len(net.params):
        raise MagicMismatch(f"checkpoint has {n_arrays} arrays, spec needs {len(net.params)}")
    with torch.no_grad():
        for p in net.params:
            (ndim,) = r.unpack("<B")
            shape = r.unpack(f"<{ndim}I")
            count = int(np.prod(shape)) if ndim else 1
            raw = np.frombuffer(r.take(count * np.dtype(np_dtype).itemsize), dtype=np_dtype)
            p.copy_(torch.from_numpy(raw.reshape(shape).copy()))
    return net
