"""4x4 orthonormal DCT with a dead-zone uniform quantizer."""
from __future__ import annotations

import numpy as np

ROUNDING_OFFSET = 1.0 / 3.0


def _dct_matrix(n=4):
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    m = np.cos(np.pi * (2 * i + 1) * k / (2 * n)) * np.sqrt(2.0 / n)
    m[0] /= np.sqrt(2.0)
    return m


DCT4 = _dct_matrix()

# zigzag scan of a 4x4 block, as flat indices
ZIGZAG4 = np.array([0, 1, 4, 8, 5, 2, 3, 6, 9, 12, 13, 10, 7, 11, 14, 15])


def qstep(qp: int) -> float:
    return 2.0 ** ((qp - 4) / 6.0)


def _to_tiles(block):
    m, n = block.shape
    if m % 4 or n % 4:
        raise ValueError(f"block {m}x{n} does not tile into 4x4")
    return block.reshape(m // 4, 4, n // 4, 4).swapaxes(1, 2)


def _from_tiles(tiles):
    tm, tn = tiles.shape[:2]
    return tiles.swapaxes(1, 2).reshape(tm * 4, tn * 4)


def forward_dct(block: np.ndarray) -> np.ndarray:
    """Per-4x4-tile DCT; output keeps the spatial tile layout of ``block``."""
    tiles = _to_tiles(np.asarray(block, dtype=np.float64))
    return _from_tiles(DCT4 @ tiles @ DCT4.T)


def inverse_dct(coeffs: np.ndarray) -> np.ndarray:
    tiles = _to_tiles(np.asarray(coeffs, dtype=np.float64))
    return _from_tiles(DCT4.T @ tiles @ DCT4)


def transform_quantize(residual: np.ndarray, qp: int) -> np.ndarray:
    """Quantized levels, int16, same shape and tile layout as ``residual``."""
    c = forward_dct(residual)
    levels = np.floor(np.abs(c) / qstep(qp) + ROUNDING_OFFSET)
    return (np.sign(c) * levels).astype(np.int16)


def dequantize_inverse(levels: np.ndarray, qp: int) -> np.ndarray:
    """Float residual reconstructed from quantized levels."""
    return inverse_dct(levels.astype(np.float64) * qstep(qp))


def reconstruct(prediction: np.ndarray, levels: np.ndarray, qp: int) -> np.ndarray:
    if not levels.any():
        return prediction.astype(np.uint8)
    out = prediction.astype(np.float64) + dequantize_inverse(levels, qp)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def zigzag(levels: np.ndarray) -> np.ndarray:
    """Flatten tile by tile (raster order of tiles), zigzag within each tile."""
    tiles = _to_tiles(levels)
    return tiles.reshape(-1, 16)[:, ZIGZAG4].reshape(-1)


def inverse_zigzag(values: np.ndarray, shape=(16, 16)) -> np.ndarray:
    m, n = shape
    flat = np.asarray(values).reshape(-1, 16)
    tiles = np.empty_like(flat)
    tiles[:, ZIGZAG4] = flat
    return _from_tiles(tiles.reshape(m // 4, n // 4, 4, 4))
