"""Little-endian binary container for EncodedStream ("MVSL", version 1)."""
from __future__ import annotations

import struct

import numpy as np

from ..errors import MagicMismatch, MalformedStream, VersionUnsupported
from .transform import inverse_zigzag, zigzag
from .types import (MB, EncodedFrame, EncodedStream, MacroblockRecord, MotionVector,
                    PartitionKind, StreamHeader)

MAGIC = b"MVSL"
VERSION = 1
COEFFS_PER_MB = MB * MB

_HEAD = struct.Struct("<4sHHHIBBH")
_SEED = struct.Struct("<Q")
_FRAME = struct.Struct("<BI")
_MB = struct.Struct("<BB")
_PAIR = struct.Struct("<hh")
_U32 = struct.Struct("<I")


def serialize(stream: EncodedStream) -> bytes:
    h = stream.header
    desc = h.descriptor.encode("utf-8")
    out = [_HEAD.pack(MAGIC, VERSION, h.width, h.height, h.n_frames, h.qp, h.gop_size,
                      len(desc)), desc, _SEED.pack(h.seed)]
    for frame in stream.frames:
        out.append(_FRAME.pack(0 if frame.is_intra else 1, len(frame.records)))
        for rec, levels in zip(frame.records, frame.coeffs):
            out.append(_MB.pack(int(rec.partition), len(rec.mvs)))
            out.extend(_PAIR.pack(mv.h, mv.v) for mv in rec.mvs)
            out.append(_PAIR.pack(rec.mvp.h, rec.mvp.v))
            if rec.all_coeffs_zero:
                out.append(_U32.pack(0))
            else:
                out.append(_U32.pack(COEFFS_PER_MB))
                out.append(zigzag(levels).astype("<i2").tobytes())
    return b"".join(out)


class _Reader:
    def __init__(self, data):
        self.data, self.pos = memoryview(data), 0

    def take(self, fmt: struct.Struct, what: str):
        if self.pos + fmt.size > len(self.data):
            raise MalformedStream(f"truncated {what}", self.pos)
        vals = fmt.unpack_from(self.data, self.pos)
        self.pos += fmt.size
        return vals

    def raw(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise MalformedStream(f"truncated {what}", self.pos)
        out = bytes(self.data[self.pos:self.pos + n])
        self.pos += n
        return out


def _read_header(rd: _Reader) -> StreamHeader:
    if len(rd.data) < 4 or bytes(rd.data[:4]) != MAGIC:
        raise MagicMismatch("not an MVSL stream", 0)
    magic, version, width, height, n_frames, qp, gop, dlen = rd.take(_HEAD, "header")
    if version != VERSION:
        raise VersionUnsupported(f"container version {version}", 4)
    try:
        desc = rd.raw(dlen, "descriptor").decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedStream("descriptor is not UTF-8", rd.pos - dlen) from exc
    (seed,) = rd.take(_SEED, "seed")
    if width == 0 or height == 0 or width % MB or height % MB:
        raise MalformedStream(f"dimensions {width}x{height} not macroblock aligned", 6)
    if qp > 51:
        raise MalformedStream(f"qp {qp} out of range", 14)
    if gop == 0:
        raise MalformedStream("gop_size must be positive", 15)
    return StreamHeader(width, height, n_frames, qp, gop, desc, seed)


def deserialize(data: bytes) -> EncodedStream:
    rd = _Reader(data)
    header = _read_header(rd)
    n_mb = header.mb_rows * header.mb_cols
    stream = EncodedStream(header)
    for t in range(header.n_frames):
        start = rd.pos
        ftype, count = rd.take(_FRAME, f"frame {t} header")
        if ftype not in (0, 1):
            raise MalformedStream(f"frame {t}: unknown frame type {ftype}", start)
        is_intra = ftype == 0
        if is_intra != (t % header.gop_size == 0):
            raise MalformedStream(f"frame {t}: frame type disagrees with gop", start)
        if count != n_mb:
            raise MalformedStream(f"frame {t}: {count} macroblocks, expected {n_mb}", start)
        records, coeffs = [], np.zeros((n_mb, MB, MB), dtype=np.int16)
        for idx in range(n_mb):
            pos = rd.pos
            code, n_mv = rd.take(_MB, "macroblock header")
            try:
                kind = PartitionKind(code)
            except ValueError:
                raise MalformedStream(f"unknown partition code {code}", pos) from None
            if n_mv != kind.n_mvs:
                raise MalformedStream(f"{kind.name} with {n_mv} MVs", pos)
            if is_intra and kind is not PartitionKind.Intra:
                raise MalformedStream(f"{kind.name} macroblock in an I-frame", pos)
            mvs = tuple(MotionVector(*rd.take(_PAIR, "motion vector")) for _ in range(n_mv))
            mvp = MotionVector(*rd.take(_PAIR, "mvp"))
            (length,) = rd.take(_U32, "coefficient length")
            if length not in (0, COEFFS_PER_MB):
                raise MalformedStream(f"coefficient payload of {length} values", rd.pos - 4)
            if length:
                if kind is PartitionKind.PSkip:
                    raise MalformedStream("PSkip macroblock with residual", rd.pos - 4)
                vals = np.frombuffer(rd.raw(2 * length, "coefficients"), dtype="<i2")
                coeffs[idx] = inverse_zigzag(vals)
                if not coeffs[idx].any():
                    raise MalformedStream("explicit all-zero coefficient payload", pos)
            r, c = divmod(idx, header.mb_cols)
            records.append(MacroblockRecord(t, r, c, kind, mvs, mvp, length == 0))
        stream.frames.append(EncodedFrame(is_intra, records, coeffs))
    if rd.pos != len(rd.data):
        raise MalformedStream(f"{len(rd.data) - rd.pos} trailing bytes", rd.pos)
    return stream


def write_stream(path, stream: EncodedStream) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize(stream))


def read_stream(path) -> EncodedStream:
    with open(path, "rb") as fh:
        return deserialize(fh.read())
