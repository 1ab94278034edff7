import numpy as np
import pytest
from hypothesis import given, strategies as st

from mvsteg.codec import MotionVector as MV, PartitionKind, encode_sequence, serialize
from mvsteg.codec.types import SUB_BLOCKS
from mvsteg.errors import RateTooHigh
from mvsteg.stego import EmbeddingPlan, embed_mv, n_carriers, parity, select_carriers


def test_embed_examples(rng):
    assert embed_mv(MV(1, 2), 1, rng) == MV(1, 2)
    seen = {embed_mv(MV(1, 2), 0, np.random.default_rng(s)) for s in range(200)}
    assert seen == {MV(0, 2), MV(2, 2), MV(1, 1), MV(1, 3)}


def test_embed_exhaustive_parity():
    rng = np.random.default_rng(0)
    for h in range(-8, 9):
        for v in range(-8, 9):
            for bit in (0, 1):
                out = embed_mv(MV(h, v), bit, rng)
                assert parity(out) == bit
                assert abs(out.h - h) + abs(out.v - v) == (0 if parity((h, v)) == bit else 1)


def test_embed_respects_allowed(rng):
    only_up = lambda mv: mv.v > 0
    for _ in range(50):
        assert embed_mv(MV(0, 0), 1, rng, only_up) == MV(0, 1)
    # a filter that rejects everything is ignored
    assert parity(embed_mv(MV(0, 0), 1, rng, lambda mv: False)) == 1


@given(st.integers(0, 400), st.floats(0, 1))
def test_carrier_count(n, rate):
    frame_mvs = [(i, MV(i % 5, -(i % 3)), i) for i in range(n)]
    plan = EmbeddingPlan("lsb-match-random", rate, 3)
    chosen = select_carriers(frame_mvs, plan)
    assert len(chosen) == n_carriers(rate, n) == int(np.floor(rate * n + 0.5))
    assert len(set(chosen)) == len(chosen)
    assert chosen == select_carriers(frame_mvs, plan)


def test_carrier_examples():
    mvs = [(i, MV(1, 0), 0) for i in range(100)]
    assert select_carriers(mvs, EmbeddingPlan(rate=0.0)) == []
    assert len(select_carriers(mvs, EmbeddingPlan(rate=0.2))) == 20
    three = [(4, MV(0, 0), 0), (9, MV(3, 4), 0), (12, MV(1, 1), 0)]
    assert select_carriers(three, EmbeddingPlan("magnitude-selective", 1 / 3)) == [9]
    ties = [(7, MV(2, 0), 0), (3, MV(0, -2), 0), (5, MV(1, 0), 0)]
    assert select_carriers(ties, EmbeddingPlan("magnitude-selective", 1 / 3)) == [3]


def test_rate_too_high():
    mvs = [(i, MV(0, 0), 0) for i in range(10)]
    with pytest.raises(RateTooHigh):
        select_carriers(mvs, EmbeddingPlan(rate=1.5))


def test_plan_validation_and_descriptor():
    plan = EmbeddingPlan("magnitude-selective", 0.25, 17)
    assert plan.descriptor == "method=magnitude-selective;rate=0.25;seed=17"
    assert EmbeddingPlan.from_descriptor(plan.descriptor) == plan
    assert not EmbeddingPlan(rate=0).active
    with pytest.raises(ValueError):
        EmbeddingPlan("f5")
    with pytest.raises(ValueError):
        EmbeddingPlan(rate=-0.1)


def test_rate_zero_is_byte_identical(object_video, pan_video):
    for video in (object_video, pan_video):
        cover = serialize(encode_sequence(video, 25))
        for method in ("lsb-match-random", "magnitude-selective"):
            plan = EmbeddingPlan(method, 0.0, 99)
            assert serialize(encode_sequence(video, 25, embedder=plan)) == cover


def test_embedding_is_deterministic(object_video):
    plan = EmbeddingPlan(rate=0.3, seed=4)
    a = serialize(encode_sequence(object_video, 25, embedder=plan))
    b = serialize(encode_sequence(object_video, 25, embedder=plan))
    c = serialize(encode_sequence(object_video, 25, embedder=EmbeddingPlan(rate=0.3, seed=5)))
    assert a == b and a != c
    assert b"method=lsb-match-random;rate=0.3;seed=4" in a


@pytest.mark.parametrize("method", ["lsb-match-random", "magnitude-selective"])
def test_carriers_hold_payload_parity(object_video, method):
    plan = EmbeddingPlan(method, 0.5, 8)
    session = plan.start()

    class Fixed:
        active = True

        def start(self):
            return session

    stream = encode_sequence(object_video, 22, embedder=Fixed())
    assert session.carriers == len(session.trace) > 0
    per_frame = {}
    for t, block_id, bit, mv_in, mv_out in session.trace:
        rec = stream.frames[t].records[block_id // 4]
        assert rec.partition.is_inter
        assert rec.mvs[block_id % 4] == mv_out
        assert parity(mv_out) == bit
        assert abs(mv_out.h - mv_in.h) + abs(mv_out.v - mv_in.v) <= 1
        per_frame.setdefault(t, [0, 0])
        per_frame[t][0] += 1
        per_frame[t][1] += mv_out != mv_in
    assert all(changed <= carriers for carriers, changed in per_frame.values())
    assert session.modified == sum(c for _, c in per_frame.values())


def test_stego_differs_only_in_p_frames(object_video):
    cover = encode_sequence(object_video, 25)
    stego = encode_sequence(object_video, 25, embedder=EmbeddingPlan(rate=0.5, seed=1))
    for fc, fs in zip(cover.frames, stego.frames):
        if fc.is_intra:
            assert fc == fs
    changed = sum(rc != rs for fc, fs in zip(cover.frames, stego.frames)
                  for rc, rs in zip(fc.records, fs.records))
    assert changed > 0
    for rec in stego.records:
        assert len(rec.mvs) == len(SUB_BLOCKS.get(rec.partition, ()))
        if rec.partition in (PartitionKind.PSkip, PartitionKind.Intra):
            assert rec.mvs == ()
