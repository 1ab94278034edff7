"""In-loop +-1 motion-vector embedders (LSB matching on MV parity).

These are proxies for distortion-minimizing MV steganography: each carrier
motion vector is brought to the parity of its payload bit by adding +-1 to
one component, so the perturbation amplitude never exceeds 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codec.types import MotionVector
from .errors import RateTooHigh

METHODS = ("lsb-match-random", "magnitude-selective")


def parity(mv) -> int:
    return (mv[0] + mv[1]) % 2


def embed_mv(mv: MotionVector, bit: int, rng: np.random.Generator, allowed=None) -> MotionVector:
    """Return ``mv`` with parity(h + v) == bit, changing at most one component by 1.

    ``allowed`` optionally restricts the +-1 candidates (e.g. to keep the
    reference block inside the frame); if it rejects every candidate the
    restriction is ignored.
    """
    mv = MotionVector(*mv)
    if parity(mv) == bit:
        return mv
    h, v = mv
    cands = [MotionVector(h - 1, v), MotionVector(h + 1, v),
             MotionVector(h, v - 1), MotionVector(h, v + 1)]
    if allowed is not None:
        cands = [c for c in cands if allowed(c)] or cands
    return cands[int(rng.integers(len(cands)))]


def n_carriers(rate: float, n_mvs: int) -> int:
    return int(math.floor(rate * n_mvs + 0.5))


@dataclass(frozen=True)
class EmbeddingPlan:
    method: str = "lsb-match-random"
    rate: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown embedding method {self.method!r}")
        if not self.rate >= 0:
            raise ValueError("rate must be non-negative")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def descriptor(self) -> str:
        return f"method={self.method};rate={self.rate!r};seed={self.seed}"

    @classmethod
    def from_descriptor(cls, text: str) -> "EmbeddingPlan":
        fields = dict(item.partition("=")[::2] for item in text.split(";") if item)
        return cls(fields["method"], float(fields["rate"]), int(fields["seed"]))

    @property
    def active(self) -> bool:
        """A zero-rate plan embeds nothing and leaves the stream untouched."""
        return self.rate > 0

    def start(self) -> "EmbeddingSession":
        return EmbeddingSession(self)

    def payload(self, frame_index: int) -> np.random.Generator:
        """Pseudo-random message bit source for one frame."""
        return np.random.default_rng([self.seed, frame_index, 1])


def select_carriers(frame_mvs, plan: EmbeddingPlan, rng: np.random.Generator | None = None):
    """Block ids of the round(rate * len(frame_mvs)) motion vectors that carry payload.

    ``frame_mvs`` holds (block_id, MotionVector, sad) for non-skip inter MVs.
    """
    n = len(frame_mvs)
    k = n_carriers(plan.rate, n)
    if k > n:
        raise RateTooHigh(f"{k} carriers requested from {n} motion vectors")
    if k == 0:
        return []
    if plan.method == "lsb-match-random":
        rng = rng if rng is not None else np.random.default_rng(plan.seed)
        picks = rng.choice(n, size=k, replace=False)
        return sorted(frame_mvs[i][0] for i in picks)
    ranked = sorted(frame_mvs, key=lambda item: (-(abs(item[1][0]) + abs(item[1][1])), item[0]))
    return sorted(item[0] for item in ranked[:k])


class EmbeddingSession:
    """Per-encode embedding state; randomness is re-derived per frame."""

    def __init__(self, plan: EmbeddingPlan):
        self.plan = plan
        self.descriptor = plan.descriptor
        self.carriers = 0
        self.modified = 0
        self.trace = []     # (frame, block id, bit, mv in, mv out) per carrier
        self._frame = None
        self._rng = self._bits = None

    def select(self, frame_index, frame_mvs):
        self._frame = frame_index
        self._rng = np.random.default_rng([self.plan.seed, frame_index, 0])
        self._bits = self.plan.payload(frame_index)
        return select_carriers(frame_mvs, self.plan, self._rng)

    def perturb(self, mv, allowed=None, block_id=None):
        bit = int(self._bits.integers(2))
        out = embed_mv(mv, bit, self._rng, allowed)
        self.carriers += 1
        self.modified += out != mv
        self.trace.append((self._frame, block_id, bit, MotionVector(*mv), out))
        return out
