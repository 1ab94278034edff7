"""Recompression calibration: decode, re-encode, decode again, align macroblocks."""
from __future__ import annotations

from dataclasses import dataclass

from .codec import decode_sequence, encode_sequence
from .codec.types import EncodedStream, MacroblockRecord, PartitionKind
from .errors import NoSkipBlocks


@dataclass(frozen=True)
class CalibratedBlockPair:
    frame_index: int
    mb_row: int
    mb_col: int
    first: MacroblockRecord
    second: MacroblockRecord


@dataclass
class CalibratedSequence:
    pairs: list[CalibratedBlockPair]
    qp_first: int
    qp_second: int
    recompressed: EncodedStream | None = None

    def p_frames(self) -> list[int]:
        return sorted({p.frame_index for p in self.pairs})


def align(first: list[MacroblockRecord], second: list[MacroblockRecord],
          p_frames) -> list[CalibratedBlockPair]:
    """Pair records addressing the same grid cell of the same P-frame."""
    wanted = set(p_frames)
    index = {(r.frame_index, r.mb_row, r.mb_col): r for r in second if r.frame_index in wanted}
    pairs = []
    for rec in first:
        key = (rec.frame_index, rec.mb_row, rec.mb_col)
        if key in index:
            pairs.append(CalibratedBlockPair(*key, rec, index[key]))
    return pairs


def calibrate(stream: EncodedStream, qp_override: int | None = None,
              keep_recompressed: bool = False) -> CalibratedSequence:
    """Recompress ``stream`` with its own header parameters (qp optionally replaced)."""
    h = stream.header
    video, first = decode_sequence(stream)
    qp2 = h.qp if qp_override is None else qp_override
    again = encode_sequence(video, qp2, h.gop_size, h.search_range, h.strategy, seed=h.seed)
    _, second = decode_sequence(again)
    common = sorted(set(stream.p_frame_indices()) & set(again.p_frame_indices()))
    return CalibratedSequence(align(first, second, common), h.qp, qp2,
                              again if keep_recompressed else None)


def retained_skip_fraction(cal: CalibratedSequence) -> float:
    """Share of first-compression PSkip blocks still PSkip after recompression."""
    skipped = [p for p in cal.pairs if p.first.partition is PartitionKind.PSkip]
    if not skipped:
        raise NoSkipBlocks("no PSkip macroblocks in the first compression")
    kept = sum(p.second.partition is PartitionKind.PSkip for p in skipped)
    return kept / len(skipped)
