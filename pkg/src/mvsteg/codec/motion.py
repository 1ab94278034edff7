"""Motion vector prediction, MVD cost model and block-matching search."""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .types import MotionVector, ZERO_MV

STRATEGIES = ("full", "hexagon")

LARGE_HEXAGON = ((-2, 0), (-1, -2), (1, -2), (2, 0), (1, 2), (-1, 2))
SMALL_DIAMOND = ((0, -1), (-1, 0), (1, 0), (0, 1))


def se_golomb_length(x: int) -> int:
    """Bits of the signed exp-Golomb code for ``x``."""
    code_num = 2 * abs(x) - (1 if x > 0 else 0)
    return 2 * ((code_num + 1).bit_length() - 1) + 1


def _se_golomb_lengths(x: np.ndarray) -> np.ndarray:
    code_num = 2 * np.abs(x) - (x > 0)
    return 2 * np.floor(np.log2(code_num + 1)).astype(np.int64) + 1


def compute_mvd(mv: MotionVector, mvp: MotionVector) -> MotionVector:
    return MotionVector(mv.h - mvp.h, mv.v - mvp.v)


def mvd_bits(mvd: MotionVector) -> int:
    return se_golomb_length(mvd.h) + se_golomb_length(mvd.v)


def _median3(a, b, c):
    return max(min(a, b), min(max(a, b), c))


def predict_mvp(left: MotionVector | None, top: MotionVector | None,
                topright: MotionVector | None) -> MotionVector:
    """Component-wise median of the left (A), top (B) and top-right (C) MVs.

    Only A available -> A. Nothing available -> (0, 0). Otherwise absent
    neighbours count as (0, 0) in the median.
    """
    if left is not None and top is None and topright is None:
        return MotionVector(*left)
    if left is None and top is None and topright is None:
        return ZERO_MV
    a, b, c = (ZERO_MV if n is None else n for n in (left, top, topright))
    return MotionVector(_median3(a[0], b[0], c[0]), _median3(a[1], b[1], c[1]))


def valid_window(y: int, x: int, bh: int, bw: int, frame_shape, search_range: int):
    """Inclusive (h_lo, h_hi, v_lo, v_hi) of in-frame, in-range displacements."""
    H, W = frame_shape
    return (max(-search_range, -x), min(search_range, W - bw - x),
            max(-search_range, -y), min(search_range, H - bh - y))


def pad_reference(reference: np.ndarray, search_range: int) -> np.ndarray:
    return np.pad(reference, search_range, mode="edge").astype(np.int16)


def sad_map(block: np.ndarray, padded_ref: np.ndarray, y: int, x: int,
            search_range: int, frame_shape) -> np.ndarray:
    """SAD for every displacement in the +-search_range window.

    Returns a (2R+1, 2R+1) float array indexed [v + R, h + R]; out-of-frame
    displacements are ``inf``.
    """
    bh, bw = block.shape
    R = search_range
    window = padded_ref[y:y + bh + 2 * R, x:x + bw + 2 * R]
    cand = sliding_window_view(window, (bh, bw))
    sad = np.abs(cand - block.astype(np.int16)).sum(axis=(2, 3), dtype=np.int64)
    return mask_invalid(sad.astype(np.float64), y, x, bh, bw, frame_shape, R)


def mask_invalid(sad, y, x, bh, bw, frame_shape, search_range):
    R = search_range
    h_lo, h_hi, v_lo, v_hi = valid_window(y, x, bh, bw, frame_shape, R)
    out = np.full_like(sad, np.inf)
    out[v_lo + R:v_hi + R + 1, h_lo + R:h_hi + R + 1] = sad[v_lo + R:v_hi + R + 1,
                                                          h_lo + R:h_hi + R + 1]
    return out


def quadrant_sads(mb: np.ndarray, padded_ref: np.ndarray, y: int, x: int,
                  search_range: int) -> np.ndarray:
    """SAD of each 8x8 quadrant of a 16x16 macroblock: (2R+1, 2R+1, 2, 2) int64, unmasked."""
    R = search_range
    window = padded_ref[y:y + 16 + 2 * R, x:x + 16 + 2 * R]
    cand = sliding_window_view(window, (16, 16))
    diff = np.abs(cand - mb.astype(np.int16))
    n = 2 * R + 1
    return diff.reshape(n, n, 2, 8, 2, 8).sum(axis=(3, 5), dtype=np.int64)


def mvd_bits_map(mvp: MotionVector, search_range: int) -> np.ndarray:
    """mvd_bits(mv - mvp) for every mv in the window, indexed [v + R, h + R]."""
    offs = np.arange(-search_range, search_range + 1)
    return (_se_golomb_lengths(offs - mvp.v)[:, None]
            + _se_golomb_lengths(offs - mvp.h)[None, :])


def _lookup(cost, h, v, R):
    if -R <= h <= R and -R <= v <= R:
        return cost[v + R, h + R]
    return np.inf


def full_search(cost: np.ndarray, search_range: int) -> MotionVector:
    """Raster-order first minimum of the cost map."""
    idx = int(np.argmin(cost))
    n = 2 * search_range + 1
    return MotionVector(idx % n - search_range, idx // n - search_range)


def hexagon_search(cost: np.ndarray, center: MotionVector, search_range: int) -> MotionVector:
    """Large-hexagon descent followed by a small-diamond refinement.

    Starts from the better of ``center`` (clamped into the window) and (0, 0).
    """
    R = search_range
    start = MotionVector(min(max(center.h, -R), R), min(max(center.v, -R), R))
    if not _lookup(cost, *start, R) <= _lookup(cost, 0, 0, R):
        start = ZERO_MV
    best, best_cost = start, _lookup(cost, *start, R)
    for _ in range(4 * R + 4):
        moved = False
        ch, cv = best
        for dh, dv in LARGE_HEXAGON:
            c = _lookup(cost, ch + dh, cv + dv, R)
            if c < best_cost:
                best, best_cost, moved = MotionVector(ch + dh, cv + dv), c, True
        if not moved:
            break
    ch, cv = best
    for dh, dv in SMALL_DIAMOND:
        c = _lookup(cost, ch + dh, cv + dv, R)
        if c < best_cost:
            best, best_cost = MotionVector(ch + dh, cv + dv), c
    return best


def search(cost: np.ndarray, center: MotionVector, search_range: int, strategy: str):
    if strategy == "full":
        return full_search(cost, search_range)
    if strategy == "hexagon":
        return hexagon_search(cost, center, search_range)
    raise ValueError(f"unknown search strategy {strategy!r}")


def motion_estimate(block: np.ndarray, reference: np.ndarray, position: tuple[int, int],
                    center: MotionVector = ZERO_MV, search_range: int = 16,
                    strategy: str = "full", lambda_motion: float = 0.0):
    """Best (MotionVector, sad) for ``block`` located at ``position`` = (y, x).

    Minimizes SAD + lambda_motion * mvd_bits(mv - center). Candidates whose
    reference block leaves the frame are skipped.
    """
    y, x = position
    block = np.asarray(block)
    padded = pad_reference(reference, search_range)
    sad = sad_map(block, padded, y, x, search_range, reference.shape)
    cost = sad + lambda_motion * mvd_bits_map(center, search_range)
    mv = search(cost, center, search_range, strategy)
    return mv, int(sad[mv.v + search_range, mv.h + search_range])
