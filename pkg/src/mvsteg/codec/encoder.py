"""Closed-loop encoder: I-frames by direct transform, P-frames by RD-chosen inter partitions."""
from __future__ import annotations

import math

import numpy as np

from ..errors import EmptyVideo, InvalidQp
from ..yuv_io import VideoSequence
from .inter import fetch_block, in_frame, inter_prediction, neighbour_mvp, p_skip_test
from .motion import STRATEGIES, mask_invalid, mvd_bits_map, pad_reference, quadrant_sads, search
from .transform import reconstruct, transform_quantize
from .types import (INTER_PARTITIONS, MB, SUB_BLOCKS, EncodedFrame, EncodedStream,
                    MacroblockRecord, MotionVector, PartitionKind, StreamHeader, ZERO_MV)

HEADER_BITS = 4
DEFAULT_SEARCH_RANGE = 16
DEFAULT_STRATEGY = "hexagon"


def lagrangians(qp: int) -> tuple[float, float]:
    """(lambda_mode, lambda_motion)."""
    lam_mode = 0.85 * 2.0 ** ((qp - 12) / 3.0)
    return lam_mode, math.sqrt(lam_mode)


def encoder_descriptor(search_range: int, strategy: str, embedder: str | None = None) -> str:
    desc = f"search={search_range};strategy={strategy}"
    return f"{desc};{embedder}" if embedder else desc


def _check_params(video, qp, gop_size, search_range, strategy):
    if not isinstance(qp, (int, np.integer)) or not 0 <= qp <= 51:
        raise InvalidQp(f"qp must be an integer in [0, 51], got {qp!r}")
    if video is None or video.n_frames < 1:
        raise EmptyVideo("nothing to encode")
    if not 1 <= gop_size <= 255:
        raise ValueError("gop_size must be in [1, 255]")
    if not 1 <= search_range <= 255:
        raise ValueError("search_range must be in [1, 255]")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown search strategy {strategy!r}")


def _encode_i_frame(cur, t, qp):
    rows, cols = cur.shape[0] // MB, cur.shape[1] // MB
    records, coeffs = [], np.zeros((rows * cols, MB, MB), dtype=np.int16)
    recon = np.empty_like(cur)
    zero = np.zeros((MB, MB), dtype=np.uint8)
    for idx in range(rows * cols):
        r, c = divmod(idx, cols)
        y, x = r * MB, c * MB
        levels = transform_quantize(cur[y:y + MB, x:x + MB], qp)
        coeffs[idx] = levels
        recon[y:y + MB, x:x + MB] = reconstruct(zero, levels, qp)
        records.append(MacroblockRecord(t, r, c, PartitionKind.Intra, (), ZERO_MV,
                                        not levels.any()))
    return EncodedFrame(True, records, coeffs), recon


class _PFrameCoder:
    """Codes one P-frame; optionally perturbs MVs of selected carrier sub-blocks."""

    def __init__(self, cur, ref, t, qp, search_range, strategy):
        self.cur, self.ref, self.t, self.qp = cur, ref, t, qp
        self.R, self.strategy = search_range, strategy
        self.lam_mode, self.lam_motion = lagrangians(qp)
        self.padded = pad_reference(ref, search_range)

    def _best_inter(self, mb, y, x, mvp):
        R, shape = self.R, self.ref.shape
        quads = quadrant_sads(mb, self.padded, y, x, R)
        bits_map = mvd_bits_map(mvp, R)
        motion_bits = self.lam_motion * bits_map
        best = None
        for kind in INTER_PARTITIONS:
            mvs, sads, bits = [], [], 0
            for by, bx, bh, bw in SUB_BLOCKS[kind]:
                sad = quads[:, :, by // 8:(by + bh) // 8, bx // 8:(bx + bw) // 8].sum(axis=(2, 3))
                sad = mask_invalid(sad.astype(np.float64), y + by, x + bx, bh, bw, shape, R)
                mv = search(sad + motion_bits, mvp, R, self.strategy)
                mvs.append(mv)
                sads.append(int(sad[mv.v + R, mv.h + R]))
                bits += int(bits_map[mv.v + R, mv.h + R])
            cost = sum(sads) + self.lam_mode * (bits + HEADER_BITS + len(mvs) - 1)
            if best is None or cost < best[0]:
                best = (cost, kind, mvs, sads)
        return best

    def code(self, carriers=None, session=None):
        cur, ref, qp = self.cur, self.ref, self.qp
        rows, cols = cur.shape[0] // MB, cur.shape[1] // MB
        grid = [[None] * cols for _ in range(rows)]
        records, coeffs = [], np.zeros((rows * cols, MB, MB), dtype=np.int16)
        recon = np.empty_like(cur)
        frame_mvs = []
        zero = np.zeros((MB, MB), dtype=np.uint8)
        for idx in range(rows * cols):
            r, c = divmod(idx, cols)
            y, x = r * MB, c * MB
            mb = cur[y:y + MB, x:x + MB]
            mvp = neighbour_mvp(grid, r, c)
            if p_skip_test(mb, mvp, ref, qp, (y, x)):
                rec = MacroblockRecord(self.t, r, c, PartitionKind.PSkip, (), mvp, True)
                recon[y:y + MB, x:x + MB] = fetch_block(ref, y, x, mvp)
            else:
                inter_cost, kind, mvs, sads = self._best_inter(mb, y, x, mvp)
                intra_cost = float(np.abs(mb - mb.mean()).sum())
                if intra_cost < inter_cost:
                    levels = transform_quantize(mb, qp)
                    pred, kind, mvs = zero, PartitionKind.Intra, []
                else:
                    for k, (mv, sad) in enumerate(zip(mvs, sads)):
                        frame_mvs.append((idx * 4 + k, mv, sad))
                    if carriers:
                        mvs = self._embed(mvs, kind, idx, y, x, carriers, session)
                    pred = inter_prediction(ref, y, x, kind, mvs)
                    levels = transform_quantize(mb.astype(np.int16) - pred.astype(np.int16), qp)
                coeffs[idx] = levels
                recon[y:y + MB, x:x + MB] = reconstruct(pred, levels, qp)
                rec = MacroblockRecord(self.t, r, c, kind, tuple(mvs), mvp, not levels.any())
            grid[r][c] = rec
            records.append(rec)
        return EncodedFrame(False, records, coeffs), recon, frame_mvs

    def _embed(self, mvs, kind, idx, y, x, carriers, session):
        out = list(mvs)
        for k, (by, bx, bh, bw) in enumerate(SUB_BLOCKS[kind]):
            if idx * 4 + k in carriers:
                def allowed(mv, by=by, bx=bx, bh=bh, bw=bw):
                    return in_frame(y + by, x + bx, mv, bh, bw, self.ref.shape)
                out[k] = session.perturb(out[k], allowed, idx * 4 + k)
        return out


def encode_with_reconstruction(video: VideoSequence, qp: int, gop_size: int = 6,
                               search_range: int = DEFAULT_SEARCH_RANGE,
                               strategy: str = DEFAULT_STRATEGY, embedder=None, seed: int = 0):
    """Encode and also return the encoder-side reconstruction, (frames, H, W) uint8.

    ``embedder`` is anything with ``active`` and ``start()``; the session it
    returns exposes ``descriptor``, ``select(frame_index, frame_mvs)`` and
    ``perturb(mv, allowed, block_id)``. Carriers are chosen per frame from a dry pass,
    then the frame is re-coded with the perturbed MVs so residuals and the
    reconstruction loop follow the modified references.
    """
    _check_params(video, qp, gop_size, search_range, strategy)
    session = embedder.start() if embedder is not None and embedder.active else None
    header = StreamHeader(video.width, video.height, video.n_frames, int(qp), gop_size,
                          encoder_descriptor(search_range, strategy,
                                             session.descriptor if session else None),
                          seed)
    stream = EncodedStream(header)
    recon_frames = []
    for t in range(video.n_frames):
        cur = video.y[t]
        if t % gop_size == 0:
            frame, recon = _encode_i_frame(cur, t, qp)
        else:
            coder = _PFrameCoder(cur, recon_frames[-1], t, qp, search_range, strategy)
            frame, recon, frame_mvs = coder.code()
            if session is not None:
                carriers = set(session.select(t, frame_mvs))
                if carriers:
                    frame, recon, _ = coder.code(carriers, session)
        stream.frames.append(frame)
        recon_frames.append(recon)
    return stream, np.stack(recon_frames)


def encode_sequence(video: VideoSequence, qp: int, gop_size: int = 6,
                    search_range: int = DEFAULT_SEARCH_RANGE, strategy: str = DEFAULT_STRATEGY,
                    embedder=None, seed: int = 0) -> EncodedStream:
    return encode_with_reconstruction(video, qp, gop_size, search_range, strategy,
                                      embedder, seed)[0]
