"""Point codec, tree snapshots and text ingestion.

Wire layout of a point (all little-endian)::

    u32 nnz | u32 key * nnz | f32 value * nnz

``encode_point`` wraps it in standard padded base-64.  Snapshots use the
same layout with f64 values so derived centers and means survive exactly.

Snapshot stream::

    "ISO1" | u8 version | header | u32 crc(header) | records | u32 crc(records)

``header`` = u32 dim, u32 capacity, u8 split mode, u32 brute cutoff,
u32 min fill, f64 geom eps, u64 point count, u32 height.  Records are nodes in
pre-order: u8 kind, u32 entry count, center, f64 radius, u64 n, mean,
f64 sumsq, then the points of a leaf.
"""

from __future__ import annotations

import base64
import binascii
import io
import logging
import math
import os
import struct
import zlib
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Iterator, Optional, Union

import numpy as np

from .errors import (
    DecodeError,
    DimensionError,
    IngestError,
    MalformedBase64Error,
    SnapshotCorruptError,
    SnapshotCountError,
    SnapshotVersionError,
    TruncatedPayloadError,
    UnsortedKeysError,
    ZeroValueError,
)
from .geometry import Ball
from .sparse_point import EMPTY, SparsePoint
from .stats import StatSummary
from .stree import SPLIT_MODES, Node, STree, TreeConfig

log = logging.getLogger(__name__)

MAGIC = b"ISO1"
VERSION = 1
_HEADER = struct.Struct("<IIBIIdQI")
_U32 = struct.Struct("<I")
_F32_MAX = float(np.finfo(np.float32).max)

PathOrFile = Union[str, os.PathLike, BinaryIO]


def point_bytes(p: SparsePoint, wide: bool = False) -> bytes:
    vdtype = "<f8" if wide else "<f4"
    return (
        _U32.pack(p.nnz)
        + p.keys.astype("<u4").tobytes()
        + p.vals.astype(vdtype).tobytes()
    )


def _read_point(buf: memoryview, off: int, wide: bool) -> tuple[SparsePoint, int]:
    if len(buf) - off < 4:
        raise TruncatedPayloadError("missing coordinate count")
    (nnz,) = _U32.unpack_from(buf, off)
    off += 4
    width = 8 if wide else 4
    need = nnz * (4 + width)
    if len(buf) - off < need:
        raise TruncatedPayloadError(f"payload holds {len(buf) - off} bytes, {need} needed")
    keys = np.frombuffer(buf, dtype="<u4", count=nnz, offset=off).astype(np.int64)
    off += 4 * nnz
    vals = np.frombuffer(buf, dtype="<f8" if wide else "<f4", count=nnz, offset=off).astype(np.float64)
    off += width * nnz
    if nnz > 1 and not np.all(keys[1:] > keys[:-1]):
        raise UnsortedKeysError("coordinate indices are not strictly increasing")
    if np.any(vals == 0.0):
        raise ZeroValueError("explicit zero coordinate")
    if not np.all(np.isfinite(vals)):
        raise DecodeError("non-finite coordinate value")
    if nnz == 0:
        return EMPTY, off
    return SparsePoint(keys, vals, check=False), off


def encode_point(p: SparsePoint) -> str:
    return base64.b64encode(point_bytes(p)).decode("ascii")


def decode_point(s: str) -> SparsePoint:
    try:
        raw = base64.b64decode(s, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise MalformedBase64Error(f"malformed base-64: {exc}") from None
    p, off = _read_point(memoryview(raw), 0, wide=False)
    if off != len(raw):
        raise DecodeError(f"{len(raw) - off} trailing bytes after point")
    return p


# -- snapshots -------------------------------------------------------------


def _write_node(out: list[bytes], node: Node) -> None:
    out.append(struct.pack("<BI", 0 if node.leaf else 1, len(node.entries)))
    out.append(point_bytes(node.ball.center, wide=True))
    out.append(struct.pack("<dQ", node.ball.radius, node.stats.n))
    out.append(point_bytes(node.stats.mean, wide=True))
    out.append(struct.pack("<d", node.stats.sumsq))
    if node.leaf:
        out.extend(point_bytes(p, wide=True) for p in node.entries)
    else:
        for c in node.entries:
            _write_node(out, c)


def dump_tree(t: STree) -> bytes:
    cfg = t.config
    header = _HEADER.pack(
        cfg.dim,
        cfg.capacity,
        SPLIT_MODES.index(cfg.split_mode),
        cfg.brute_cutoff,
        cfg.min_fill,
        cfg.geom_eps,
        len(t),
        t.height,
    )
    head = MAGIC + bytes([VERSION]) + header
    body: list[bytes] = []
    if t.root is not None:
        _write_node(body, t.root)
    records = b"".join(body)
    return b"".join([head, _U32.pack(zlib.crc32(head)), records, _U32.pack(zlib.crc32(records))])


def save_tree(t: STree, sink: PathOrFile) -> None:
    data = dump_tree(t)
    if hasattr(sink, "write"):
        sink.write(data)
    else:
        with open(sink, "wb") as fh:
            fh.write(data)


class _Reader:
    def __init__(self, buf: memoryview, dim: int):
        self.buf = buf
        self.off = 0
        self.dim = dim
        self.points = 0
        self.leaf_depths: set[int] = set()

    def unpack(self, fmt: str):
        size = struct.calcsize(fmt)
        if len(self.buf) - self.off < size:
            raise SnapshotCorruptError("record truncated")
        vals = struct.unpack_from(fmt, self.buf, self.off)
        self.off += size
        return vals

    def point(self) -> SparsePoint:
        try:
            p, self.off = _read_point(self.buf, self.off, wide=True)
        except DecodeError as exc:
            raise SnapshotCorruptError(f"bad point record: {exc}") from None
        if p.nnz and p.keys[-1] >= self.dim:
            raise SnapshotCorruptError("coordinate index beyond dimensionality")
        return p

    def node(self, depth: int) -> Node:
        kind, count = self.unpack("<BI")
        if kind not in (0, 1) or count == 0:
            raise SnapshotCorruptError(f"bad node record (kind {kind}, {count} entries)")
        center = self.point()
        radius, n = self.unpack("<dQ")
        mean = self.point()
        (sumsq,) = self.unpack("<d")
        if not (math.isfinite(radius) and radius >= 0 and math.isfinite(sumsq) and sumsq >= 0):
            raise SnapshotCorruptError("invalid ball or statistics")
        if kind == 0:
            entries = [self.point() for _ in range(count)]
            self.points += count
            self.leaf_depths.add(depth)
            if n != count:
                raise SnapshotCorruptError(f"leaf claims {n} points, holds {count}")
        else:
            entries = [self.node(depth + 1) for _ in range(count)]
            if n != sum(c.stats.n for c in entries):
                raise SnapshotCorruptError("inner node count disagrees with children")
        return Node(kind == 0, entries, Ball(center, radius), StatSummary(int(n), mean, sumsq))


def loads_tree(data: bytes) -> STree:
    buf = memoryview(data)
    head_len = len(MAGIC) + 1 + _HEADER.size
    if len(buf) < head_len + 8:
        raise SnapshotCorruptError("snapshot too short")
    if bytes(buf[:4]) != MAGIC:
        raise SnapshotCorruptError("bad magic")
    if buf[4] != VERSION:
        raise SnapshotVersionError(f"unsupported snapshot version {buf[4]}")
    (head_crc,) = _U32.unpack_from(buf, head_len)
    if zlib.crc32(buf[:head_len]) != head_crc:
        raise SnapshotCorruptError("header checksum mismatch")
    dim, cap, mode, cutoff, min_fill, eps, count, height = _HEADER.unpack_from(buf, 5)
    records = buf[head_len + 4 : len(buf) - 4]
    (body_crc,) = _U32.unpack_from(buf, len(buf) - 4)
    if zlib.crc32(records) != body_crc:
        raise SnapshotCorruptError("record checksum mismatch")
    if mode >= len(SPLIT_MODES):
        raise SnapshotCorruptError(f"unknown split mode {mode}")
    try:
        config = TreeConfig(
            dim=dim, capacity=cap, split_mode=SPLIT_MODES[mode], brute_cutoff=cutoff, min_fill=min_fill, geom_eps=eps
        )
    except ValueError as exc:
        raise SnapshotCorruptError(f"invalid configuration: {exc}") from None
    tree = STree(config)
    reader = _Reader(records, dim)
    if len(records):
        tree.root = reader.node(0)
    if reader.off != len(records):
        raise SnapshotCorruptError("trailing bytes after node records")
    if reader.points != count:
        raise SnapshotCountError(f"header promises {count} points, records hold {reader.points}")
    if len(reader.leaf_depths) > 1:
        raise SnapshotCorruptError("leaves at different depths")
    tree.size = count
    if tree.height != height:
        raise SnapshotCorruptError(f"header height {height} != stored height {tree.height}")
    return tree


def load_tree(source: PathOrFile) -> STree:
    if hasattr(source, "read"):
        return loads_tree(source.read())
    with open(source, "rb") as fh:
        return loads_tree(fh.read())


# -- text ingestion ----------------------------------------------------------


def format_value(v: float) -> str:
    f32 = np.float32(v)
    if float(f32) == v:
        text = repr(float(f32)) if not math.isfinite(v) else np.format_float_positional(f32, trim="-")
    else:
        text = repr(float(v))
    return text


def format_point(p: SparsePoint) -> str:
    return " ".join(f"{k}:{format_value(v)}" for k, v in p.pairs())


def parse_point(line: str, dim: Optional[int] = None) -> SparsePoint:
    """Parse ``"index:value index:value ..."``; values are stored at f32."""
    keys: list[int] = []
    vals: list[float] = []
    for tok in line.split():
        k_text, sep, v_text = tok.partition(":")
        if not sep:
            raise ValueError(f"token {tok!r} is not index:value")
        try:
            k = int(k_text)
            v = float(v_text)
        except ValueError:
            raise ValueError(f"token {tok!r} is not index:value") from None
        if k < 0:
            raise ValueError(f"negative index {k}")
        if dim is not None and k >= dim:
            raise DimensionError(f"index {k} >= dimensionality {dim}")
        if keys and k <= keys[-1]:
            raise ValueError(f"index {k} not ascending")
        if not math.isfinite(v):
            raise ValueError(f"non-finite value in {tok!r}")
        if abs(v) > _F32_MAX:
            raise ValueError(f"value in {tok!r} overflows float32")
        v32 = float(np.float32(v))
        if v32 == 0.0:
            raise ValueError(f"zero value in {tok!r}")
        keys.append(k)
        vals.append(v32)
    if not keys:
        return EMPTY
    return SparsePoint(keys, vals, check=False)


@dataclass
class IngestReport:
    points: int = 0
    skipped: list[tuple[int, str]] = field(default_factory=list)


def ingest(
    lines: Iterable[str],
    dim: Optional[int] = None,
    on_error: str = "fail",
    report: Optional[IngestReport] = None,
) -> Iterator[SparsePoint]:
    """Stream points from text lines, one point per line.

    A blank line is the empty point (the origin); lines starting with
    ``#`` are comments.  With
    ``on_error="skip"`` malformed lines are recorded in ``report`` and
    skipped; otherwise the first one raises :class:`IngestError`.
    """
    if on_error not in ("fail", "skip"):
        raise ValueError("on_error must be 'fail' or 'skip'")
    if report is None:
        report = IngestReport()
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if text.startswith("#"):
            continue
        try:
            p = parse_point(text, dim)
        except ValueError as exc:
            if on_error == "fail":
                raise IngestError(lineno, str(exc)) from None
            report.skipped.append((lineno, str(exc)))
            log.warning("line %d skipped: %s", lineno, exc)
            continue
        report.points += 1
        yield p


def ingest_file(path: PathOrFile, **kwargs) -> Iterator[SparsePoint]:
    if hasattr(path, "read"):
        yield from ingest(path, **kwargs)
        return
    with open(path, encoding="utf-8") as fh:
        yield from ingest(fh, **kwargs)


def write_points(points: Iterable[SparsePoint], out: io.TextIOBase) -> int:
    n = 0
    for p in points:
        out.write(format_point(p) + "\n")
        n += 1
    return n
