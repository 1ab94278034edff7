import filecmp
import os
from dataclasses import replace

import pytest

from mvsteg.errors import ConfigError
from mvsteg.experiment import CorpusSpec, ExperimentConfig, run_experiment

TINY = ExperimentConfig(corpus=CorpusSpec(count=5, width=48, height=48, n_frames=12, seed=3),
                        rates=(0.0, 0.4), repeats=2, folds=2, qp_overrides=(28,))


def test_empty_corpus_rejected_before_work(tmp_path):
    cfg = replace(TINY, corpus=replace(TINY.corpus, count=0), out_dir=str(tmp_path / "x"))
    with pytest.raises(ConfigError):
        run_experiment(cfg)
    assert not os.path.exists(tmp_path / "x")


@pytest.mark.parametrize("change", [
    dict(qps=()), dict(rates=(1.5,)), dict(method="f5"), dict(window_mode="strided"),
    dict(strategy="tss"), dict(train_fraction=1.0), dict(workers=0), dict(qp_overrides=(60,)),
])
def test_invalid_values_rejected(change):
    with pytest.raises(ConfigError):
        replace(TINY, **change).validate()


def test_ini_roundtrip():
    cfg = replace(TINY, corpus=replace(TINY.corpus, noise=None, motion_models=("global-pan",)))
    text = cfg.to_ini()
    assert ExperimentConfig.from_ini(text) == cfg
    assert ExperimentConfig.from_ini("[corpus]\ncount = 7\n").corpus.count == 7
    with pytest.raises(ConfigError):
        ExperimentConfig.from_ini("[experiment]\nbogus = 1\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_ini("[experiment]\nrepeats = many\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_ini("not an ini")


def test_rate_zero_is_chance(tmp_path):
    cfg = replace(TINY, rates=(0.0,), qp_overrides=(), out_dir=str(tmp_path))
    res = run_experiment(cfg)
    assert [rep.mean for rep in res.reports.values()] == [0.5]


def _files(root):
    return sorted(os.path.relpath(os.path.join(d, f), root)
                  for d, _, fs in os.walk(root) for f in fs)


def test_reports_are_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    res = run_experiment(replace(TINY, out_dir=str(a)))
    run_experiment(replace(TINY, out_dir=str(b), workers=2))
    names = _files(a)
    assert names == _files(b)
    for name in names:
        if name == "config.ini":     # records out_dir and workers, which differ here
            continue
        assert filecmp.cmp(a / name, b / name, shallow=False), name
    assert "accuracy_matrix.csv" in names and "diagnostics.csv" in names
    assert set(res.reports) == {(25, 0.0, 25), (25, 0.0, 28), (25, 0.4, 25), (25, 0.4, 28)}
    matrix = (a / "accuracy_matrix.csv").read_text().splitlines()
    assert matrix[0] == "qp,rate,calibration_qp,mean,std" and len(matrix) == 5
    assert ExperimentConfig.load(a / "config.ini") == replace(TINY, out_dir=str(a))
