"""Gaussian-kernel SVM (SMO dual solver) and the pair-split evaluation protocol."""
from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import MalformedStream, MagicMismatch, SingleClassInput, TooFewPairs, VersionUnsupported

COVER, STEGO = -1, 1
C_GRID = tuple(2.0 ** k for k in range(-1, 8))
GAMMA_GRID = tuple(2.0 ** k for k in range(-7, 4))
KKT_TOL = 1e-3
TAU = 1e-12


@dataclass(frozen=True, eq=False)
class LabeledSample:
    features: np.ndarray
    label: int
    pair_id: object


def gaussian_kernel(x, y, gamma: float) -> float:
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    d = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    return float(np.exp(-gamma * d.dot(d)))


def sq_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    d = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.maximum(d, 0.0)


@dataclass
class MinMaxScaler:
    low: np.ndarray
    span: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "MinMaxScaler":
        low, high = X.min(axis=0), X.max(axis=0)
        span = high - low
        return cls(low, np.where(span > 0, span, 1.0))

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.low) / self.span


def smo_solve(K: np.ndarray, y: np.ndarray, c: float, tol: float = KKT_TOL,
              max_iter: int | None = None, alpha: np.ndarray | None = None):
    """Solve min 1/2 a'Qa - e'a, 0 <= a <= c, y'a = 0 with Q = yy' * K.

    Working pairs are chosen by maximal violation plus second-order gain
    (first index wins ties), so the result is a deterministic function of
    the inputs. A feasible ``alpha`` may be passed as a warm start. Returns
    (alpha, rho, iterations) with decision f(x) = sum a_i y_i K(x_i, x) - rho.
    """
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    if max_iter is None:
        max_iter = max(100_000, 200 * n)
    Q = K * np.outer(y, y)
    diag = np.diag(K).copy()
    alpha = np.zeros(n) if alpha is None else np.clip(alpha, 0.0, c).astype(np.float64)
    G = Q @ alpha - 1.0
    pos = y > 0
    it = 0
    for it in range(1, max_iter + 1):
        vals = -y * G
        below, above = alpha < c, alpha > 0
        up = np.where(pos, below, above)
        low = np.where(pos, above, below)
        if not up.any() or not low.any():
            break
        masked = np.where(up, vals, -np.inf)
        i = int(np.argmax(masked))
        g_max = masked[i]
        if g_max - vals[low].min() < tol:
            break
        b = g_max - vals
        a = diag[i] + diag - 2.0 * K[i]
        a = np.where(a > 0, a, TAU)
        gain = np.where(low & (b > 0), b * b / a, -np.inf)
        j = int(np.argmax(gain))
        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(diag[i] + diag[j] + 2.0 * Q[i, j], TAU)
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > c:
                    ni, nj = c, c - diff
            elif nj > c:
                nj, ni = c, c + diff
        else:
            quad = max(diag[i] + diag[j] - 2.0 * Q[i, j], TAU)
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > c:
                if ni > c:
                    ni, nj = c, total - c
            elif nj < 0:
                nj, ni = 0.0, total
            if total > c:
                if nj > c:
                    nj, ni = c, total - c
            elif ni < 0:
                ni, nj = 0.0, total
        G += Q[i] * (ni - ai) + Q[j] * (nj - aj)
        alpha[i], alpha[j] = ni, nj
    return alpha, _rho(alpha, G, y, c), it


def _rho(alpha, G, y, c):
    yG = y * G
    at_upper, at_lower = alpha >= c, alpha <= 0
    free = ~at_upper & ~at_lower
    if free.any():
        return float(yG[free].mean())
    # bounds from the KKT conditions when no multiplier is free
    ub_mask = (at_upper & (y < 0)) | (at_lower & (y > 0))
    lb_mask = (at_upper & (y > 0)) | (at_lower & (y < 0))
    ub = yG[ub_mask].min() if ub_mask.any() else np.inf
    lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
    return float((ub + lb) / 2)


@dataclass(eq=False)
class TrainedModel:
    support_vectors: np.ndarray
    dual_coef: np.ndarray          # alpha_i * y_i
    bias: float
    gamma: float
    c: float
    scaler: MinMaxScaler

    def decision_function(self, X) -> np.ndarray:
        Xs = self.scaler.transform(np.atleast_2d(np.asarray(X, dtype=np.float64)))
        if len(self.support_vectors) == 0:
            return np.full(len(Xs), self.bias)
        K = np.exp(-self.gamma * sq_distances(Xs, self.support_vectors))
        return K @ self.dual_coef + self.bias

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_function(X) >= 0, STEGO, COVER)


def _arrays(samples):
    X = np.array([s.features for s in samples], dtype=np.float64)
    y = np.array([s.label for s in samples], dtype=np.float64)
    if not set(np.unique(y)) <= {COVER, STEGO}:
        raise ValueError("labels must be -1 (cover) or +1 (stego)")
    return X, y


def _fit_scaled(Xs, y, c, gamma, scaler, K=None, alpha0=None):
    if K is None:
        K = np.exp(-gamma * sq_distances(Xs, Xs))
    alpha, rho, _ = smo_solve(K, y, c, alpha=alpha0)
    sv = alpha > 0
    model = TrainedModel(Xs[sv], alpha[sv] * y[sv], -rho, gamma, c, scaler)
    return model, alpha


def train(samples: list[LabeledSample], c: float, gamma: float) -> TrainedModel:
    """Fit min-max scaling on ``samples`` and solve the soft-margin dual."""
    if c <= 0 or gamma <= 0:
        raise ValueError("c and gamma must be positive")
    X, y = _arrays(samples)
    if len(np.unique(y)) < 2:
        raise SingleClassInput("training data contains a single class")
    scaler = MinMaxScaler.fit(X)
    return _fit_scaled(scaler.transform(X), y, c, gamma, scaler)[0]


def pair_folds(pair_ids, folds: int, seed: int) -> list[list]:
    """Shuffle distinct pair ids and deal them round-robin into ``folds`` groups."""
    unique = sorted(set(pair_ids), key=repr)
    order = np.random.default_rng(seed).permutation(len(unique))
    groups = [[] for _ in range(min(folds, len(unique)))]
    for k, idx in enumerate(order):
        groups[k % len(groups)].append(unique[idx])
    return groups


def cross_validate(samples: list[LabeledSample], c_grid=C_GRID, gamma_grid=GAMMA_GRID,
                   folds: int = 5, seed: int = 0, return_scores: bool = False):
    """Grid point (c, gamma) with the best mean fold accuracy.

    Folds never split a cover/stego pair. Ties go to the smaller c, then the
    smaller gamma.
    """
    c_grid, gamma_grid = sorted(c_grid), sorted(gamma_grid)
    if not c_grid or not gamma_grid:
        raise ValueError("grids must be non-empty")
    X, y = _arrays(samples)
    if len(np.unique(y)) < 2:
        raise SingleClassInput("training data contains a single class")
    pids = [s.pair_id for s in samples]
    groups = pair_folds(pids, folds, seed)
    scores = np.zeros((len(c_grid), len(gamma_grid)))
    n_used = 0
    for group in groups:
        held = np.array([p in set(group) for p in pids])
        if held.all() or len(np.unique(y[~held])) < 2:
            continue
        n_used += 1
        scaler = MinMaxScaler.fit(X[~held])
        Xt, Xv = scaler.transform(X[~held]), scaler.transform(X[held])
        Dt, Dv = sq_distances(Xt, Xt), sq_distances(Xv, Xt)
        yt, yv = y[~held], y[held]
        for gi, gamma in enumerate(gamma_grid):
            K, Kv = np.exp(-gamma * Dt), np.exp(-gamma * Dv)
            alpha = None
            for ci, c in enumerate(c_grid):
                alpha, rho, _ = smo_solve(K, yt, c, alpha=alpha)
                pred = np.where(Kv @ (alpha * yt) - rho >= 0, STEGO, COVER)
                scores[ci, gi] += np.mean(pred == yv)
    if n_used:
        scores /= n_used
    ci, gi = np.unravel_index(int(np.argmax(scores)), scores.shape)
    best = (c_grid[ci], gamma_grid[gi])
    return (best, scores) if return_scores else best


@dataclass
class AccuracyReport:
    accuracies: list[float] = field(default_factory=list)
    params: list[tuple[float, float]] = field(default_factory=list)
    train_pairs: list[list] = field(default_factory=list)
    test_pairs: list[list] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std(self) -> float:
        return float(np.std(self.accuracies))

    def rows(self):
        for r, (acc, (c, gamma)) in enumerate(zip(self.accuracies, self.params)):
            yield [r, repr(c), repr(gamma), repr(float(acc))]


def evaluate(corpus: list[LabeledSample], repeats: int = 10, train_fraction: float = 0.6,
             seed: int = 0, c_grid=C_GRID, gamma_grid=GAMMA_GRID, folds: int = 5) -> AccuracyReport:
    """Repeated 60/40 pair splits, cross-validated grid, test accuracy per repeat."""
    pairs = sorted({s.pair_id for s in corpus}, key=repr)
    if len(pairs) < 5:
        raise TooFewPairs(f"{len(pairs)} cover/stego pairs; at least 5 required")
    n_train = min(max(int(np.floor(train_fraction * len(pairs) + 0.5)), 1), len(pairs) - 1)
    report = AccuracyReport()
    for r in range(repeats):
        rng = np.random.default_rng([seed, r])
        perm = rng.permutation(len(pairs))
        train_ids = {pairs[k] for k in perm[:n_train]}
        train_set = [s for s in corpus if s.pair_id in train_ids]
        test_set = [s for s in corpus if s.pair_id not in train_ids]
        c, gamma = cross_validate(train_set, c_grid, gamma_grid, folds, seed=seed * 1000 + r)
        model = train(train_set, c, gamma)
        X, y = _arrays(test_set)
        report.accuracies.append(float(np.mean(model.predict(X) == y)))
        report.params.append((c, gamma))
        report.train_pairs.append(sorted(train_ids, key=repr))
        report.test_pairs.append(sorted({s.pair_id for s in test_set}, key=repr))
    return report


def write_report_csv(path, report: AccuracyReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["repeat", "c", "gamma", "accuracy"])
        w.writerows(report.rows())


MODEL_MAGIC = b"MVSM"
MODEL_VERSION = 1
_MODEL_HEAD = struct.Struct("<4sHHIddd")


def model_to_bytes(model: TrainedModel) -> bytes:
    n, dim = model.support_vectors.shape if len(model.support_vectors) else (0, len(model.scaler.low))
    parts = [_MODEL_HEAD.pack(MODEL_MAGIC, MODEL_VERSION, dim, n, model.c, model.gamma, model.bias)]
    for arr in (model.scaler.low, model.scaler.span, model.support_vectors.reshape(n, dim),
                model.dual_coef):
        parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return b"".join(parts)


def model_from_bytes(data: bytes) -> TrainedModel:
    if data[:4] != MODEL_MAGIC:
        raise MagicMismatch("not a model blob", 0)
    if len(data) < _MODEL_HEAD.size:
        raise MalformedStream("truncated model header", len(data))
    _, version, dim, n, c, gamma, bias = _MODEL_HEAD.unpack_from(data)
    if version != MODEL_VERSION:
        raise VersionUnsupported(f"model version {version}", 4)
    expected = _MODEL_HEAD.size + 8 * (2 * dim + n * dim + n)
    if len(data) != expected:
        raise MalformedStream(f"model blob is {len(data)} bytes, expected {expected}")
    vals = np.frombuffer(data, dtype="<f8", offset=_MODEL_HEAD.size)
    low, span = vals[:dim], vals[dim:2 * dim]
    sv = vals[2 * dim:2 * dim + n * dim].reshape(n, dim)
    coef = vals[2 * dim + n * dim:]
    return TrainedModel(sv.copy(), coef.copy(), bias, gamma, c, MinMaxScaler(low.copy(), span.copy()))
