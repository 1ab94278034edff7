from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import NamedTuple

import numpy as np

MB = 16


class MotionVector(NamedTuple):
    """Integer-pel displacement: reference top-left = block top-left + (h, v)."""

    h: int
    v: int


ZERO_MV = MotionVector(0, 0)


class PartitionKind(IntEnum):
    PSkip = 0
    P16x16 = 1
    P16x8 = 2
    P8x16 = 3
    P8x8 = 4
    Intra = 5

    @property
    def is_inter(self) -> bool:
        return self in INTER_PARTITIONS

    @property
    def n_mvs(self) -> int:
        return len(SUB_BLOCKS.get(self, ()))


INTER_PARTITIONS = (PartitionKind.P16x16, PartitionKind.P16x8,
                    PartitionKind.P8x16, PartitionKind.P8x8)

# (y, x, height, width) of each sub-block inside the macroblock, raster order
SUB_BLOCKS = {
    PartitionKind.P16x16: ((0, 0, 16, 16),),
    PartitionKind.P16x8: ((0, 0, 8, 16), (8, 0, 8, 16)),
    PartitionKind.P8x16: ((0, 0, 16, 8), (0, 8, 16, 8)),
    PartitionKind.P8x8: ((0, 0, 8, 8), (0, 8, 8, 8), (8, 0, 8, 8), (8, 8, 8, 8)),
}


@dataclass(frozen=True)
class MacroblockRecord:
    frame_index: int
    mb_row: int
    mb_col: int
    partition: PartitionKind
    mvs: tuple[MotionVector, ...]
    mvp: MotionVector
    all_coeffs_zero: bool

    def __post_init__(self):
        if len(self.mvs) != self.partition.n_mvs:
            raise ValueError(f"{self.partition.name} carries {self.partition.n_mvs} MVs, "
                             f"got {len(self.mvs)}")
        if self.partition is PartitionKind.PSkip and not self.all_coeffs_zero:
            raise ValueError("PSkip macroblocks have no residual")

    def mv_at(self, y: int, x: int) -> MotionVector | None:
        """MV of the sub-block covering pixel (y, x); inferred MV for PSkip, None for Intra."""
        if self.partition is PartitionKind.Intra:
            return None
        if self.partition is PartitionKind.PSkip:
            return self.mvp
        for mv, (by, bx, bh, bw) in zip(self.mvs, SUB_BLOCKS[self.partition]):
            if by <= y < by + bh and bx <= x < bx + bw:
                return mv
        raise ValueError(f"pixel ({y}, {x}) outside the macroblock")


@dataclass(frozen=True)
class StreamHeader:
    width: int
    height: int
    n_frames: int
    qp: int
    gop_size: int
    descriptor: str = ""
    seed: int = 0

    @property
    def mb_cols(self) -> int:
        return self.width // MB

    @property
    def mb_rows(self) -> int:
        return self.height // MB

    def params(self) -> dict[str, str]:
        """Key/value pairs of the descriptor blob (``k=v;k=v``)."""
        out = {}
        for item in filter(None, self.descriptor.split(";")):
            key, _, value = item.partition("=")
            out[key] = value
        return out

    @property
    def search_range(self) -> int:
        return int(self.params().get("search", 16))

    @property
    def strategy(self) -> str:
        return self.params().get("strategy", "hexagon")

    @property
    def embedder(self) -> str | None:
        p = self.params()
        if "method" not in p:
            return None
        return f"method={p['method']};rate={p['rate']};seed={p['seed']}"


@dataclass(eq=False)
class EncodedFrame:
    """One coded picture. ``coeffs`` is (n_mb, 16, 16) int16 in 4x4-tile layout."""

    is_intra: bool
    records: list[MacroblockRecord]
    coeffs: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, EncodedFrame):
            return NotImplemented
        return (self.is_intra == other.is_intra and self.records == other.records
                and np.array_equal(self.coeffs, other.coeffs))


@dataclass(eq=False)
class EncodedStream:
    header: StreamHeader
    frames: list[EncodedFrame] = field(default_factory=list)

    def __eq__(self, other):
        if not isinstance(other, EncodedStream):
            return NotImplemented
        return self.header == other.header and self.frames == other.frames

    @property
    def records(self) -> list[MacroblockRecord]:
        return [r for f in self.frames for r in f.records]

    def p_frame_indices(self) -> list[int]:
        return [t for t, f in enumerate(self.frames) if not f.is_intra]
