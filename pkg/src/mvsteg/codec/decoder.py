from __future__ import annotations

import numpy as np

from ..errors import MalformedStream
from ..yuv_io import VideoSequence
from .container import deserialize
from .inter import fetch_block, inter_prediction, neighbour_mvp
from .transform import reconstruct
from .types import MB, EncodedStream, MacroblockRecord, PartitionKind, ZERO_MV


def decode_frames(stream: EncodedStream) -> np.ndarray:
    return _decode(stream)[0]


def _decode(stream: EncodedStream):
    h = stream.header
    if len(stream.frames) != h.n_frames:
        raise MalformedStream(f"header declares {h.n_frames} frames, stream has "
                              f"{len(stream.frames)}")
    zero = np.zeros((MB, MB), dtype=np.uint8)
    frames, records = [], []
    for t, frame in enumerate(stream.frames):
        if frame.is_intra != (t % h.gop_size == 0) or (t == 0 and not frame.is_intra):
            raise MalformedStream(f"frame {t}: frame type disagrees with gop")
        if len(frame.records) != h.mb_rows * h.mb_cols:
            raise MalformedStream(f"frame {t}: wrong macroblock count")
        recon = np.empty((h.height, h.width), dtype=np.uint8)
        grid = [[None] * h.mb_cols for _ in range(h.mb_rows)]
        for idx, rec in enumerate(frame.records):
            r, c = divmod(idx, h.mb_cols)
            y, x = r * MB, c * MB
            levels = frame.coeffs[idx]
            if frame.is_intra:
                if rec.partition is not PartitionKind.Intra or rec.mvp != ZERO_MV:
                    raise MalformedStream(f"frame {t} mb {idx}: inter data in an I-frame")
                pred = zero
            else:
                mvp = neighbour_mvp(grid, r, c)
                if mvp != rec.mvp:
                    raise MalformedStream(f"frame {t} mb {idx}: stored MVP {tuple(rec.mvp)} "
                                          f"!= predicted {tuple(mvp)}")
                if rec.partition is PartitionKind.Intra:
                    pred = zero
                elif rec.partition is PartitionKind.PSkip:
                    pred = fetch_block(frames[-1], y, x, mvp)
                else:
                    pred = inter_prediction(frames[-1], y, x, rec.partition, rec.mvs)
            recon[y:y + MB, x:x + MB] = reconstruct(pred, levels, h.qp)
            grid[r][c] = rec
            if (rec.frame_index, rec.mb_row, rec.mb_col) != (t, r, c):
                rec = MacroblockRecord(t, r, c, rec.partition, rec.mvs, rec.mvp,
                                       rec.all_coeffs_zero)
            records.append(rec)
        frames.append(recon)
    return np.stack(frames), records


def decode_sequence(stream) -> tuple[VideoSequence, list[MacroblockRecord]]:
    """Reconstruct the luma frames and return the macroblock coding trace.

    Accepts an EncodedStream or its serialized bytes. Chroma of the returned
    sequence is a placeholder derived from luma; the codec carries no chroma.
    """
    if isinstance(stream, (bytes, bytearray, memoryview)):
        stream = deserialize(stream)
    frames, records = _decode(stream)
    return VideoSequence.from_luma(frames), records
