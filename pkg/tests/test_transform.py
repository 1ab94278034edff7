import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.fft import dctn

from mvsteg.codec.transform import (DCT4, dequantize_inverse, forward_dct, inverse_dct,
                                    inverse_zigzag, qstep, reconstruct, transform_quantize,
                                    zigzag)

blocks = arrays(np.int16, (16, 16), elements=st.integers(-255, 255))


def _oracle_dct(block):
    # scipy's orthonormal DCT-II applied tile by tile
    out = np.empty(block.shape)
    for i in range(0, block.shape[0], 4):
        for j in range(0, block.shape[1], 4):
            out[i:i + 4, j:j + 4] = dctn(block[i:i + 4, j:j + 4].astype(float), norm="ortho")
    return out


def test_basis_is_orthonormal():
    assert np.allclose(DCT4 @ DCT4.T, np.eye(4), atol=1e-12)


@given(blocks)
def test_forward_dct_matches_scipy(block):
    assert np.allclose(forward_dct(block), _oracle_dct(block), atol=1e-9)


@given(blocks)
def test_inverse_dct_inverts(block):
    assert np.allclose(inverse_dct(forward_dct(block)), block, atol=1e-9)


def test_qstep_doubles_every_six():
    assert qstep(4) == 1.0
    for qp in range(0, 46):
        assert qstep(qp + 6) == pytest.approx(2 * qstep(qp))


@pytest.mark.parametrize("qp", [15, 25, 35])
def test_constant_residual_below_deadzone_vanishes(qp):
    q = qstep(qp)
    # DC of a constant 4x4 tile is 4c; the dead zone keeps it at 0 while 4c < 2Q/3
    c = int(np.ceil(q / 6)) - 1
    if c > 0:
        assert not transform_quantize(np.full((16, 16), c), qp).any()
    c_big = int(np.ceil(q / 6 + 1e-9)) + 1
    levels = transform_quantize(np.full((4, 4), c_big), qp)
    assert levels[0, 0] >= 1 and not levels.ravel()[1:].any()


def test_constant_residual_matches_matrix_oracle():
    for c in range(0, 40):
        for qp in (10, 20, 30):
            expected = np.floor(4 * c / qstep(qp) + 1 / 3)
            assert transform_quantize(np.full((4, 4), c), qp)[0, 0] == expected


@given(blocks, st.integers(0, 51))
def test_quantization_error_bounds(block, qp):
    q = qstep(qp)
    levels = transform_quantize(block, qp)
    coeffs = forward_dct(block)
    # dead-zone quantizer: each coefficient lands within [-Q/3, 2Q/3] in magnitude
    err = np.abs(coeffs) - np.abs(levels) * q
    assert np.all(err >= -q / 3 - 1e-9) and np.all(err <= 2 * q / 3 + 1e-9)
    # spatial error is bounded through the basis: (sum_k |D_ki|)^2 * 2Q/3
    bound = np.abs(DCT4).sum(axis=0).max() ** 2 * 2 * q / 3
    assert np.abs(dequantize_inverse(levels, qp) - block).max() <= bound + 1e-9


@given(blocks)
def test_zigzag_roundtrip(block):
    z = zigzag(block)
    assert z.shape == (256,)
    assert np.array_equal(inverse_zigzag(z, (16, 16)), block)


def test_zigzag_order_within_tile():
    tile = np.arange(16).reshape(4, 4)
    assert zigzag(tile).tolist() == [0, 1, 4, 8, 5, 2, 3, 6, 9, 12, 13, 10, 7, 11, 14, 15]


def test_reconstruct_clips_and_short_circuits():
    pred = np.full((16, 16), 250, np.uint8)
    zero = np.zeros((16, 16), np.int16)
    assert np.array_equal(reconstruct(pred, zero, 25), pred)
    levels = transform_quantize(np.full((16, 16), 60), 10)
    assert reconstruct(pred, levels, 10).max() == 255
