"""Prediction helpers shared by the encoder and decoder."""
from __future__ import annotations

import numpy as np

from .motion import predict_mvp
from .transform import transform_quantize
from .types import MB, SUB_BLOCKS, MacroblockRecord, MotionVector


def fetch_block(reference: np.ndarray, y: int, x: int, mv: MotionVector,
                bh: int = MB, bw: int = MB) -> np.ndarray:
    """Reference samples at (y + v, x + h); coordinates outside the frame clamp to the edge."""
    H, W = reference.shape
    ry, rx = y + mv.v, x + mv.h
    if 0 <= ry and ry + bh <= H and 0 <= rx and rx + bw <= W:
        return reference[ry:ry + bh, rx:rx + bw]
    rows = np.clip(np.arange(ry, ry + bh), 0, H - 1)
    cols = np.clip(np.arange(rx, rx + bw), 0, W - 1)
    return reference[np.ix_(rows, cols)]


def in_frame(y: int, x: int, mv: MotionVector, bh: int, bw: int, frame_shape) -> bool:
    H, W = frame_shape
    return 0 <= y + mv.v and y + mv.v + bh <= H and 0 <= x + mv.h and x + mv.h + bw <= W


def inter_prediction(reference: np.ndarray, y: int, x: int, partition, mvs) -> np.ndarray:
    pred = np.empty((MB, MB), dtype=np.uint8)
    for mv, (by, bx, bh, bw) in zip(mvs, SUB_BLOCKS[partition]):
        pred[by:by + bh, bx:bx + bw] = fetch_block(reference, y + by, x + bx, mv, bh, bw)
    return pred


def neighbour_mvp(grid: list[list[MacroblockRecord | None]], row: int, col: int) -> MotionVector:
    """MVP of macroblock (row, col) from already-coded neighbours in ``grid``.

    A is the left macroblock's top-right sub-block, B the top macroblock's
    bottom-left sub-block, C the top-right macroblock's bottom-left sub-block.
    """
    cols = len(grid[0])
    left = top = topright = None
    if col > 0 and grid[row][col - 1] is not None:
        left = grid[row][col - 1].mv_at(0, MB - 1)
    if row > 0:
        if grid[row - 1][col] is not None:
            top = grid[row - 1][col].mv_at(MB - 1, 0)
        if col + 1 < cols and grid[row - 1][col + 1] is not None:
            topright = grid[row - 1][col + 1].mv_at(MB - 1, 0)
    return predict_mvp(left, top, topright)


def p_skip_test(mb: np.ndarray, mvp: MotionVector, reference: np.ndarray, qp: int,
                position: tuple[int, int]) -> bool:
    """True when the MVP-displaced 16x16 prediction leaves an all-zero quantized residual."""
    y, x = position
    if not in_frame(y, x, mvp, MB, MB, reference.shape):
        return False
    pred = fetch_block(reference, y, x, mvp)
    residual = mb.astype(np.int16) - pred.astype(np.int16)
    if not residual.any():
        return True
    return not transform_quantize(residual, qp).any()
