"""Experiment matrix: corpus -> cover/stego streams -> calibration -> SMCF -> SVM accuracy.

A run is fully described by an :class:`ExperimentConfig`, stored as a small
INI file so the same directory can be re-run bit-for-bit later.
"""
from __future__ import annotations

import configparser
import csv
import hashlib
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import classifier, features
from .calibration import calibrate
from .codec import encode_sequence, serialize
from .codec.motion import STRATEGIES
from .errors import ConfigError
from .stego import METHODS, EmbeddingPlan
from .yuv_io import MOTION_MODELS, corpus_item, synthetic_corpus

LABELS = {classifier.COVER: "cover", classifier.STEGO: "stego"}


@dataclass(frozen=True)
class CorpusSpec:
    count: int = 20
    width: int = 128
    height: int = 128
    n_frames: int = 36
    motion_models: tuple[str, ...] = MOTION_MODELS
    seed: int = 2024
    noise: int | None = 1

    def build(self):
        return synthetic_corpus(self.count, self.width, self.height, self.n_frames, self.seed,
                                self.motion_models, self.noise)


@dataclass(frozen=True)
class ExperimentConfig:
    corpus: CorpusSpec = field(default_factory=CorpusSpec)
    qps: tuple[int, ...] = (25,)
    rates: tuple[float, ...] = (0.0, 0.2)
    method: str = "lsb-match-random"
    window_len: int = 5
    window_mode: str = "non-overlapping"
    qp_overrides: tuple[int, ...] = ()
    gop_size: int = 6
    search_range: int = 16
    strategy: str = "hexagon"
    repeats: int = 10
    train_fraction: float = 0.6
    folds: int = 5
    seed: int = 0
    workers: int = 1
    out_dir: str = "results"

    def validate(self) -> "ExperimentConfig":
        c = self.corpus
        checks = [
            (c.count >= 1, "corpus.count must be at least 1"),
            (c.width > 0 and c.height > 0 and c.width % 16 == 0 and c.height % 16 == 0,
             "corpus dimensions must be positive multiples of 16"),
            (c.n_frames >= 2, "corpus.n_frames must be at least 2"),
            (bool(c.motion_models) and set(c.motion_models) <= set(MOTION_MODELS),
             f"motion_models must be drawn from {MOTION_MODELS}"),
            (c.noise is None or 0 <= c.noise <= 64, "corpus.noise must be in [0, 64]"),
            (c.seed >= 0 and self.seed >= 0, "seeds must be non-negative"),
            (bool(self.qps) and all(0 <= q <= 51 for q in self.qps), "qps must lie in [0, 51]"),
            (all(0 <= q <= 51 for q in self.qp_overrides), "qp_overrides must lie in [0, 51]"),
            (bool(self.rates) and all(0 <= r <= 1 for r in self.rates), "rates must lie in [0, 1]"),
            (self.method in METHODS, f"method must be one of {METHODS}"),
            (self.window_len >= 1, "window_len must be at least 1"),
            (self.window_mode in features.MODES, f"window_mode must be one of {features.MODES}"),
            (1 <= self.gop_size <= 255, "gop_size must be in [1, 255]"),
            (1 <= self.search_range <= 255, "search_range must be in [1, 255]"),
            (self.strategy in STRATEGIES, f"strategy must be one of {STRATEGIES}"),
            (self.repeats >= 1, "repeats must be at least 1"),
            (0 < self.train_fraction < 1, "train_fraction must be in (0, 1)"),
            (self.folds >= 2, "folds must be at least 2"),
            (self.workers >= 1, "workers must be at least 1"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        return self

    def calibration_qps(self, qp: int) -> list[int]:
        """Matched calibration first, then the mismatch overrides."""
        return [qp] + [q for q in self.qp_overrides if q != qp]

    # INI round trip

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp["corpus"] = {f.name: _fmt(getattr(self.corpus, f.name)) for f in fields(CorpusSpec)}
        cp["experiment"] = {f.name: _fmt(getattr(self, f.name))
                            for f in fields(self) if f.name != "corpus"}
        lines = []
        for section in cp.sections():
            lines.append(f"[{section}]")
            lines += [f"{k} = {v}" for k, v in cp[section].items()]
            lines.append("")
        return "\n".join(lines)

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser()
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"unreadable config: {exc}") from exc
        corpus = _parse_section(cp, "corpus", CorpusSpec)
        kwargs = _parse_section(cp, "experiment", cls, skip={"corpus"})
        return cls(corpus=CorpusSpec(**corpus), **kwargs).validate()

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_ini(fh.read())


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    return "none" if value is None else str(value)


_DEFAULTS = {CorpusSpec: CorpusSpec()}


def _parse_section(cp, section, cls, skip=()):
    if section not in cp:
        return {}
    known = {f.name: f for f in fields(cls) if f.name not in skip}
    defaults = _DEFAULTS.get(cls) or ExperimentConfig()
    out = {}
    for key, raw in cp[section].items():
        if key not in known:
            raise ConfigError(f"unknown key {section}.{key}")
        default = getattr(defaults, key)
        try:
            out[key] = _coerce(raw.strip(), default, key)
        except ValueError as exc:
            raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from exc
    return out


def _coerce(raw, default, key):
    if key == "noise":
        return None if raw.lower() == "none" else int(raw)
    if isinstance(default, tuple):
        items = [x.strip() for x in raw.split(",") if x.strip()]
        if key == "motion_models" or (default and isinstance(default[0], str)):
            return tuple(items)
        if key == "rates":
            return tuple(float(x) for x in items)
        return tuple(int(x) for x in items)
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


# per-sequence work

def _plan_seed(config, index, qp, rate_index) -> int:
    return int(np.random.SeedSequence([config.seed, index, qp, rate_index]).generate_state(1)[0])


def sequence_features(config: ExperimentConfig, index: int, video):
    """All feature vectors for one corpus item.

    Returns {(qp, rate, cal_qp): (cover vectors, stego vectors)} plus the PSkip
    fraction of each cover stream keyed by qp. Calibrations are cached by
    stream bytes, so rate-0 twins (byte-identical to the cover) are free.
    """
    cache: dict[tuple[bytes, int], list] = {}

    def vectors(stream, blob, cal_qp):
        key = (hashlib.sha256(blob).digest(), cal_qp)
        if key not in cache:
            cal = calibrate(stream, qp_override=cal_qp)
            cache[key] = features.extract_smcf(cal, config.window_len, config.window_mode)
        return cache[key]

    out, skip = {}, {}
    for qp in config.qps:
        cover = encode_sequence(video, qp, config.gop_size, config.search_range, config.strategy)
        cover_blob = serialize(cover)
        recs = [r for f in cover.frames if not f.is_intra for r in f.records]
        skip[qp] = sum(r.partition == 0 for r in recs) / len(recs) if recs else 0.0
        for ri, rate in enumerate(config.rates):
            plan = EmbeddingPlan(config.method, rate, _plan_seed(config, index, qp, ri))
            if plan.active:
                stego = encode_sequence(video, qp, config.gop_size, config.search_range,
                                        config.strategy, embedder=plan)
                stego_blob = serialize(stego)
            else:
                # an inactive plan reproduces the cover byte for byte
                stego, stego_blob = cover, cover_blob
            for cal_qp in config.calibration_qps(qp):
                out[(qp, rate, cal_qp)] = (vectors(cover, cover_blob, cal_qp),
                                           vectors(stego, stego_blob, cal_qp))
    return out, skip


def _job(args):
    config, index = args
    c = config.corpus
    # regenerated inside the worker rather than pickling frames across processes
    name, video = corpus_item(index, c.width, c.height, c.n_frames, c.seed,
                              c.motion_models, c.noise)
    return name, sequence_features(config, index, video)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    reports: dict = field(default_factory=dict)     # (qp, rate, cal_qp) -> AccuracyReport
    vectors: dict = field(default_factory=dict)     # (qp, rate, cal_qp) -> {name: (cover, stego)}
    skip_fraction: dict = field(default_factory=dict)  # qp -> {name: fraction}

    def feature_matrix(self, cell, label):
        """(windows, 11) feature values for one class of one cell."""
        k = 0 if label == classifier.COVER else 1
        rows = [fv.values for pair in self.vectors[cell].values() for fv in pair[k]]
        return np.array(rows).reshape(-1, features.DIM)

    def samples(self, cell) -> list[classifier.LabeledSample]:
        out = []
        for name, (cover, stego) in self.vectors[cell].items():
            out += [classifier.LabeledSample(fv.values, classifier.COVER, name) for fv in cover]
            out += [classifier.LabeledSample(fv.values, classifier.STEGO, name) for fv in stego]
        return out


def compute_features(config: ExperimentConfig) -> ExperimentResult:
    """Encode, embed, calibrate and extract features for every corpus item."""
    config.validate()
    jobs = [(config, i) for i in range(config.corpus.count)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]
    res = ExperimentResult(config)
    for name, (cells, skip) in results:
        for cell, pair in cells.items():
            res.vectors.setdefault(cell, {})[name] = pair
        for qp, frac in skip.items():
            res.skip_fraction.setdefault(qp, {})[name] = frac
    return res


def evaluate_cells(res: ExperimentResult) -> ExperimentResult:
    cfg = res.config
    for cell in sorted(res.vectors):
        res.reports[cell] = classifier.evaluate(res.samples(cell), cfg.repeats, cfg.train_fraction,
                                                cfg.seed, folds=cfg.folds)
    return res


def _cell_tag(cell) -> str:
    qp, rate, cal_qp = cell
    return f"qp{qp}_rate{rate!r}_cal{cal_qp}"


def write_reports(res: ExperimentResult, out_dir=None) -> list[str]:
    """Write accuracy matrix, per-cell reports, feature CSVs and diagnostics."""
    out_dir = out_dir or res.config.out_dir
    for sub in ("reports", "features"):
        os.makedirs(os.path.join(out_dir, sub), exist_ok=True)
    written = []

    path = os.path.join(out_dir, "config.ini")
    with open(path, "w") as fh:
        fh.write(res.config.to_ini())
    written.append(path)

    path = os.path.join(out_dir, "accuracy_matrix.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["qp", "rate", "calibration_qp", "mean", "std"])
        for cell, rep in sorted(res.reports.items()):
            w.writerow([cell[0], repr(cell[1]), cell[2], repr(rep.mean), repr(rep.std)])
    written.append(path)

    for cell, rep in sorted(res.reports.items()):
        path = os.path.join(out_dir, "reports", f"report_{_cell_tag(cell)}.csv")
        classifier.write_report_csv(path, rep)
        written.append(path)

    for cell, per_seq in sorted(res.vectors.items()):
        rows = []
        for name, (cover, stego) in sorted(per_seq.items()):
            rows += features.feature_rows(name, "cover", cover)
            rows += features.feature_rows(name, "stego", stego)
        path = os.path.join(out_dir, "features", f"features_{_cell_tag(cell)}.csv")
        features.write_feature_csv(path, rows)
        written.append(path)

    path = os.path.join(out_dir, "diagnostics.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["qp", "rate", "calibration_qp", "label", "feature", "mean", "std"])
        for cell in sorted(res.vectors):
            for label in (classifier.COVER, classifier.STEGO):
                X = res.feature_matrix(cell, label)
                if not len(X):
                    continue
                for name, mu, sd in zip(features.FEATURE_NAMES, X.mean(0), X.std(0)):
                    w.writerow([cell[0], repr(cell[1]), cell[2], LABELS[label], name,
                                repr(float(mu)), repr(float(sd))])
    written.append(path)

    path = os.path.join(out_dir, "skip_fraction.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["qp", "sequence", "pskip_fraction"])
        for qp, per_seq in sorted(res.skip_fraction.items()):
            for name, frac in sorted(per_seq.items()):
                w.writerow([qp, name, repr(float(frac))])
    written.append(path)
    return written


def run_experiment(config: ExperimentConfig, write: bool = True) -> ExperimentResult:
    res = evaluate_cells(compute_features(config))
    if write:
        write_reports(res)
    return res
