import numpy as np
import pytest
from hypothesis import given, strategies as st

from mvsteg.errors import DimensionNotMacroblockAligned, EmptyVideo, TruncatedFile
from mvsteg.yuv_io import (MOTION_MODELS, VideoSequence, corpus_item, generate_synthetic,
                           read_yuv, synthetic_corpus, write_yuv)


def _random_sequence(seed, n, h, w):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 256, (n, h, w), dtype=np.uint8)
    u = rng.integers(0, 256, (n, h // 2, w // 2), dtype=np.uint8)
    v = rng.integers(0, 256, (n, h // 2, w // 2), dtype=np.uint8)
    return VideoSequence(y, u, v)


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 4),
       rows=st.integers(1, 3), cols=st.integers(1, 3))
def test_write_read_roundtrip(tmp_path_factory, seed, n, rows, cols):
    seq = _random_sequence(seed, n, 16 * rows, 16 * cols)
    path = tmp_path_factory.mktemp("yuv") / "s.yuv"
    write_yuv(path, seq)
    assert read_yuv(path, seq.width, seq.height) == seq


def test_all_zero_file_is_black(tmp_path):
    path = tmp_path / "zero.yuv"
    path.write_bytes(bytes(32 * 16 * 3 // 2 * 3))
    seq = read_yuv(path, 32, 16)
    assert seq.n_frames == 3
    assert not seq.y.any() and not seq.u.any() and not seq.v.any()


def test_truncated_file(tmp_path):
    path = tmp_path / "short.yuv"
    path.write_bytes(bytes(16 * 16 * 3 // 2 * 2 - 1))
    with pytest.raises(TruncatedFile):
        read_yuv(path, 16, 16)


def test_unaligned_requires_padding(tmp_path):
    w, h, n = 20, 18, 2
    rng = np.random.default_rng(0)
    raw = rng.integers(0, 256, n * w * h * 3 // 2, dtype=np.uint8)
    path = tmp_path / "odd.yuv"
    raw.tofile(path)
    with pytest.raises(DimensionNotMacroblockAligned):
        read_yuv(path, w, h)
    seq = read_yuv(path, w, h, pad=True)
    assert (seq.height, seq.width) == (32, 32)
    y0 = raw[:w * h].reshape(h, w)
    assert np.array_equal(seq.y[0, :h, :w], y0)
    # right and bottom borders replicate the last column / row
    assert np.array_equal(seq.y[0, :h, w:], np.repeat(y0[:, -1:], 32 - w, axis=1))
    assert np.array_equal(seq.y[0, h:, :], np.repeat(seq.y[0, h - 1:h, :], 32 - h, axis=0))


def test_sequence_validation():
    with pytest.raises(DimensionNotMacroblockAligned):
        VideoSequence.from_luma(np.zeros((2, 16, 24), np.uint8))
    with pytest.raises(EmptyVideo):
        VideoSequence.from_luma(np.zeros((1, 16, 16), np.uint8))
    with pytest.raises(ValueError):
        VideoSequence(np.zeros((2, 16, 16), np.uint16), np.zeros((2, 8, 8), np.uint8),
                      np.zeros((2, 8, 8), np.uint8))


@pytest.mark.parametrize("model", MOTION_MODELS)
def test_generation_is_deterministic(model):
    a = generate_synthetic(64, 64, 6, model, seed=7)
    b = generate_synthetic(64, 64, 6, model, seed=7)
    c = generate_synthetic(64, 64, 6, model, seed=8)
    assert a == b
    assert a != c


def test_static_without_noise_is_frozen():
    seq = generate_synthetic(48, 32, 5, "static+noise", seed=1, noise=0)
    assert all(np.array_equal(seq.y[0], seq.y[t]) for t in range(seq.n_frames))


def test_static_noise_is_small():
    seq = generate_synthetic(48, 32, 5, "static+noise", seed=1, noise=2)
    d = np.abs(seq.y[1:].astype(int) - seq.y[:1].astype(int))
    assert 0 < d.max() <= 4


@pytest.mark.parametrize("dx,dy", [(2, 0), (-1, 2), (0, -3)])
def test_pan_shifts_content_exactly(dx, dy):
    seq = generate_synthetic(64, 64, 4, "global-pan", seed=7, pan=(dx, dy))
    H, W = seq.height, seq.width
    for t in range(seq.n_frames - 1):
        a, b = seq.y[t].astype(int), seq.y[t + 1].astype(int)
        # frame t+1 at (y + dy, x + dx) shows what frame t showed at (y, x)
        ys, xs = slice(max(0, -dy), min(H, H - dy)), slice(max(0, -dx), min(W, W - dx))
        ys2 = slice(ys.start + dy, ys.stop + dy)
        xs2 = slice(xs.start + dx, xs.stop + dx)
        assert np.abs(a[ys, xs] - b[ys2, xs2]).max() == 0


def test_multi_object_moves():
    seq = generate_synthetic(64, 64, 6, "multi-object", seed=2, noise=0)
    changed = [(seq.y[t] != seq.y[t + 1]).mean() for t in range(5)]
    assert all(0 < c < 0.9 for c in changed)


def test_corpus_cycles_models_and_matches_items():
    corpus = synthetic_corpus(4, 32, 32, 3, seed=5)
    assert [name for name, _ in corpus] == ["seq000", "seq001", "seq002", "seq003"]
    assert corpus[3][1] == corpus_item(3, 32, 32, 3, seed=5)[1]
    assert corpus[0][1] != corpus[3][1]
    with pytest.raises(EmptyVideo):
        synthetic_corpus(0, 32, 32, 3, seed=5)


def test_generate_rejects_bad_arguments():
    with pytest.raises(EmptyVideo):
        generate_synthetic(32, 32, 1, "global-pan", seed=0)
    with pytest.raises(ValueError):
        generate_synthetic(32, 32, 3, "zoom", seed=0)
    with pytest.raises(DimensionNotMacroblockAligned):
        generate_synthetic(40, 32, 3, "global-pan", seed=0)
