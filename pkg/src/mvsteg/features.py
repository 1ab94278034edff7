"""Skipped-macroblock calibrated features (11 values per window of P-frames).

f1 (5 bins): distribution of |dh| + |dv| between first- and second-compression
MVPs over macroblocks that are PSkip in both compressions, last bin >= 4.
f2 (6 bins): first-compression partition of macroblocks that are PSkip after
recompression, over (PSkip, 16x16, 16x8, 8x16, 8x8, else).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .calibration import CalibratedBlockPair, CalibratedSequence
from .codec.types import MotionVector, PartitionKind

N_F1 = 5
N_F2 = 6
DIM = N_F1 + N_F2
MODES = ("non-overlapping", "sliding")

F2_CATEGORIES = (PartitionKind.PSkip, PartitionKind.P16x16, PartitionKind.P16x8,
                 PartitionKind.P8x16, PartitionKind.P8x8)
FEATURE_NAMES = ([f"f1_diff{k}" for k in range(4)] + ["f1_diff4plus"]
                 + ["f2_pskip", "f2_16x16", "f2_16x8", "f2_8x16", "f2_8x8", "f2_else"])


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    window_id: int
    n_f1: int
    m_f2: int

    @property
    def f1(self) -> np.ndarray:
        return self.values[:N_F1]

    @property
    def f2(self) -> np.ndarray:
        return self.values[N_F1:]

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return ((self.window_id, self.n_f1, self.m_f2) == (other.window_id, other.n_f1, other.m_f2)
                and np.array_equal(self.values, other.values))


def mvp_diff(first_mvp: MotionVector, second_mvp: MotionVector) -> int:
    return abs(first_mvp[0] - second_mvp[0]) + abs(first_mvp[1] - second_mvp[1])


def _f2_bin(kind: PartitionKind) -> int:
    return F2_CATEGORIES.index(kind) if kind in F2_CATEGORIES else N_F2 - 1


def extract_f1(pairs: list[CalibratedBlockPair]) -> tuple[np.ndarray, int]:
    counts = np.zeros(N_F1)
    for p in pairs:
        if p.first.partition is PartitionKind.PSkip and p.second.partition is PartitionKind.PSkip:
            counts[min(mvp_diff(p.first.mvp, p.second.mvp), N_F1 - 1)] += 1
    n = int(counts.sum())
    return (counts / n if n else counts), n


def extract_f2(pairs: list[CalibratedBlockPair]) -> tuple[np.ndarray, int]:
    counts = np.zeros(N_F2)
    for p in pairs:
        if p.second.partition is PartitionKind.PSkip:
            counts[_f2_bin(p.first.partition)] += 1
    m = int(counts.sum())
    return (counts / m if m else counts), m


def windows(p_frames: list[int], window_len: int, mode: str = "non-overlapping"):
    """Lists of P-frame indices forming each extraction window."""
    if window_len < 1:
        raise ValueError("window_len must be >= 1")
    if mode == "non-overlapping":
        starts = range(0, len(p_frames) - window_len + 1, window_len)
    elif mode == "sliding":
        starts = range(0, len(p_frames) - window_len + 1)
    else:
        raise ValueError(f"unknown window mode {mode!r}")
    return [p_frames[s:s + window_len] for s in starts]


def extract_smcf(cal: CalibratedSequence, window_len: int = 5,
                 mode: str = "non-overlapping") -> list[FeatureVector]:
    by_frame: dict[int, list[CalibratedBlockPair]] = {}
    for p in cal.pairs:
        by_frame.setdefault(p.frame_index, []).append(p)
    out = []
    for wid, frames in enumerate(windows(sorted(by_frame), window_len, mode)):
        pairs = [p for t in frames for p in by_frame[t]]
        f1, n = extract_f1(pairs)
        f2, m = extract_f2(pairs)
        out.append(FeatureVector(np.concatenate([f1, f2]), wid, n, m))
    return out


CSV_FIELDS = ["sequence", "window", "label", "n_f1", "m_f2"] + FEATURE_NAMES


def feature_rows(sequence_id: str, label: str, vectors: list[FeatureVector]):
    for fv in vectors:
        yield [sequence_id, fv.window_id, label, fv.n_f1, fv.m_f2] + [repr(float(x)) for x in fv.values]


def write_feature_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        w.writerows(rows)


def read_feature_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        if list(row) != CSV_FIELDS:
            raise ValueError(f"{path}: unexpected columns")
        row["window"] = int(row["window"])
        row["n_f1"] = int(row["n_f1"])
        row["m_f2"] = int(row["m_f2"])
        row["values"] = np.array([float(row.pop(name)) for name in FEATURE_NAMES])
    return rows
