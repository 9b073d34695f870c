"""Event file formats, frame rendering and key/value reports.

Text files: optional ``# width=W height=H t_end_us=T`` comment, then the
header ``t_us,x,y,p`` and one event per line with 1-based x/y.

Binary files (little-endian)::

    b"EVSR" u16 version=1 u16 reserved u32 W u32 H u64 T_us u64 count
    count x (u64 t_us, u16 x, u16 y, i8 p, u8 pad)      # 0-based x/y
"""
from __future__ import annotations

import os
import re
import struct
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .events import EventStream, SensorGeometry
from .exceptions import DataError, MagicMismatch, ParseError, TruncatedFile

MAGIC = b"EVSR"
VERSION = 1
HEADER = struct.Struct("<4sHHIIQQ")
RECORD = np.dtype([("t", "<u8"), ("x", "<u2"), ("y", "<u2"), ("p", "i1"), ("pad", "u1")])
TEXT_HEADER = "t_us,x,y,p"
_META = re.compile(r"#\s*width=(\d+)\s+height=(\d+)\s+t_end_us=(\d+)\s*$")
TEXT_SUFFIXES = (".csv", ".txt")


def sniff_format(path) -> str:
    with open(path, "rb") as fh:
        head = fh.read(4)
    return "binary" if head == MAGIC else "text"


def format_for_path(path) -> str:
    return "text" if os.fspath(path).lower().endswith(TEXT_SUFFIXES) else "binary"


def read(path, format="auto") -> EventStream:
    if format == "auto":
        format = sniff_format(path)
    if format == "text":
        return read_text(path)
    if format == "binary":
        return read_binary(path)
    raise ValueError(f"unknown format {format!r}")


def write(stream: EventStream, path, format="auto"):
    if format == "auto":
        format = format_for_path(path)
    if format == "text":
        return write_text(stream, path)
    if format == "binary":
        return write_binary(stream, path)
    raise ValueError(f"unknown format {format!r}")


def write_text(stream: EventStream, path):
    lines = [
        f"# width={stream.geometry.width} height={stream.geometry.height} t_end_us={stream.T}",
        TEXT_HEADER,
    ]
    lines += [f"{t},{x + 1},{y + 1},{p}" for x, y, t, p in stream]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_text(path) -> EventStream:
    geometry = None
    T = None
    rows = []
    seen_header = False
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = _META.match(line)
                if m and not seen_header:
                    geometry = SensorGeometry(int(m.group(1)), int(m.group(2)))
                    T = int(m.group(3))
                continue
            if not seen_header:
                if line.replace(" ", "") != TEXT_HEADER:
                    raise ParseError(f"expected header {TEXT_HEADER!r}, got {line!r}", lineno)
                seen_header = True
                continue
            fields = line.split(",")
            if len(fields) != 4:
                raise ParseError(f"expected 4 fields, got {len(fields)}", lineno)
            try:
                t, x, y, p = (int(f) for f in fields)
            except ValueError:
                raise ParseError(f"non-integer field in {line!r}", lineno) from None
            if p not in (-1, 1):
                raise ParseError(f"polarity must be -1 or 1, got {p}", lineno)
            if x < 1 or y < 1 or t < 0:
                raise ParseError(f"coordinates are 1-based and timestamps non-negative: {line!r}", lineno)
            rows.append((t, x - 1, y - 1, p))
    if not seen_header:
        raise ParseError("missing header line", None)
    arr = np.array(rows, dtype=np.int64).reshape(-1, 4)
    if geometry is None:
        if not len(arr):
            return EventStream.from_arrays(SensorGeometry(1, 1), [], [], [], [], T or 0)
        geometry = SensorGeometry(int(arr[:, 1].max()) + 1, int(arr[:, 2].max()) + 1)
    return EventStream.from_arrays(geometry, arr[:, 1], arr[:, 2], arr[:, 0], arr[:, 3], T)


def write_binary(stream: EventStream, path):
    rec = np.zeros(len(stream), dtype=RECORD)
    rec["t"] = stream.t
    rec["x"] = stream.x
    rec["y"] = stream.y
    rec["p"] = stream.p
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, 0, stream.geometry.width, stream.geometry.height,
                             stream.T, len(stream)))
        fh.write(rec.tobytes())


def read_binary(path) -> EventStream:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4 or data[:4] != MAGIC:
        raise MagicMismatch(f"{path}: not an EVSR file")
    if len(data) < HEADER.size:
        raise TruncatedFile(f"{path}: header is {len(data)} bytes, expected {HEADER.size}")
    _, version, _, W, H, T, count = HEADER.unpack_from(data)
    if version != VERSION:
        raise MagicMismatch(f"{path}: unsupported version {version}")
    need = HEADER.size + count * RECORD.itemsize
    if len(data) < need:
        raise TruncatedFile(f"{path}: {len(data)} bytes, header promises {need}")
    if len(data) > need:
        raise DataError(f"{path}: {len(data) - need} trailing bytes after {count} records")
    rec = np.frombuffer(data, dtype=RECORD, count=count, offset=HEADER.size)
    return EventStream.from_arrays(SensorGeometry(W, H), rec["x"], rec["y"], rec["t"].astype(np.int64),
                                   rec["p"], T)


@dataclass(frozen=True)
class RenderSpec:
    mode: str = "accumulate"
    window: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        if self.mode not in ("accumulate", "polarity-color"):
            raise ValueError(f"unknown render mode {self.mode!r}")


class EmptyWindowWarning(UserWarning):
    pass


def render_array(stream: EventStream, spec: RenderSpec = RenderSpec()) -> np.ndarray:
    """uint8 image: (H, W) for accumulate, (H, W, 3) for polarity-color."""
    H, W = stream.geometry.shape
    keep = np.ones(len(stream), dtype=bool)
    if spec.window is not None:
        t0, t1 = spec.window
        keep = (stream.t >= t0) & (stream.t < t1)
        if len(stream) and not keep.any():
            warnings.warn("time window contains no events", EmptyWindowWarning, stacklevel=2)
    x, y, p = stream.x[keep], stream.y[keep], stream.p[keep].astype(np.int64)
    if spec.mode == "accumulate":
        acc = np.zeros((H, W), dtype=np.int64)
        np.add.at(acc, (y, x), p)
        peak = np.abs(acc).max() if acc.size else 0
        img = np.full((H, W), 128.0)
        if peak:
            img = 128.0 + 127.0 * acc / peak
        return np.clip(np.rint(img), 0, 255).astype(np.uint8)
    pos = np.zeros((H, W), dtype=np.int64)
    neg = np.zeros((H, W), dtype=np.int64)
    np.add.at(pos, (y[p > 0], x[p > 0]), 1)
    np.add.at(neg, (y[p < 0], x[p < 0]), 1)
    img = np.full((H, W, 3), 255, dtype=np.uint8)
    img[pos > 0] = (0, 0, 255)
    img[neg > 0] = (255, 0, 0)
    img[(pos > 0) & (neg > 0)] = (255, 0, 255)
    return img


def write_pnm(img: np.ndarray, path):
    img = np.ascontiguousarray(img, dtype=np.uint8)
    magic = b"P5" if img.ndim == 2 else b"P6"
    H, W = img.shape[:2]
    with open(path, "wb") as fh:
        fh.write(magic + f"\n{W} {H}\n255\n".encode())
        fh.write(img.tobytes())


def read_pnm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    magic, dims, _maxval, body = data.split(b"\n", 3)
    W, H = (int(v) for v in dims.split())
    shape = (H, W) if magic == b"P5" else (H, W, 3)
    return np.frombuffer(body, dtype=np.uint8).reshape(shape)


def render(stream: EventStream, path, spec: RenderSpec = RenderSpec()):
    img = render_array(stream, spec)
    write_pnm(img, path)
    return img


def format_report(items: dict) -> str:
    return "".join(f"{k}: {v}\n" for k, v in items.items())


def write_report(items: dict, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_report(items))


def read_report(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if ": " in line:
                k, v = line.rstrip("\n").split(": ", 1)
                out[k] = v
    return out


def write_training_log(records, path, stage=None):
    """CSV of (stage, step, loss, lr) records."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("stage,step,loss,lr\n")
        for r in records:
            if stage is None:
                s, r = r
            else:
                s = stage
            fh.write(f"{s},{r.step},{r.loss!r},{r.lr!r}\n")
