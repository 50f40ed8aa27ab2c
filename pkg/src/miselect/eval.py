"""Goal-dependent evaluation: cross-validation, cardinality search, diagnostics.

The built-in classifiers are deliberately plain — add-one naive Bayes and
Hamming k-NN on the discretized codes — so evaluation runs stay
dependency-free and exactly reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import DiscreteDataset
from .errors import ConfigError, DataError
from .infotheory import JointPmf, marginal

CLASSIFIERS = ("naive-bayes", "knn")


@dataclass(frozen=True)
class CvConfig:
    """Cross-validation protocol settings."""

    folds: int = 5
    loo: bool = False
    classifier: str = "naive-bayes"
    knn_k: int = 3
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if self.classifier == "nb":
            object.__setattr__(self, "classifier", "naive-bayes")
        if self.classifier not in CLASSIFIERS:
            raise ConfigError(
                f"unknown classifier '{self.classifier}' (use {'|'.join(CLASSIFIERS)})")
        if not self.loo and self.folds < 2:
            raise ConfigError(f"folds must be >= 2 (got {self.folds})")
        if self.knn_k < 1 or self.knn_k % 2 == 0:
            raise ConfigError(f"knn k must be odd and >= 1 (got {self.knn_k})")


@dataclass(frozen=True)
class EvalReport:
    """Per-fold accuracies plus, for cardinality search, the per-P curve."""

    fold_accuracies: tuple[float, ...]
    mean_accuracy: float
    classifier_runs: int
    selected_p: int | None = None
    curve: tuple[dict, ...] = ()
    similarity: tuple[float, ...] = ()

    def to_json(self) -> dict:
        out = {
            "fold_accuracies": [float(a) for a in self.fold_accuracies],
            "mean_accuracy": float(self.mean_accuracy),
            "classifier_runs": int(self.classifier_runs),
        }
        if self.selected_p is not None:
            out["selected_p"] = int(self.selected_p)
        if self.curve:
            out["curve"] = [dict(row) for row in self.curve]
        if self.similarity:
            out["similarity"] = [float(s) for s in self.similarity]
        return out


def _fold_assignment(labels: np.ndarray, n_classes: int, cfg: CvConfig) -> np.ndarray:
    """Fold index per row. Stratified folds round-robin within each class."""
    m = labels.shape[0]
    folds = m if cfg.loo else cfg.folds
    if folds > m:
        raise DataError(f"folds exceed rows ({folds} > {m})")
    assign = np.empty(m, dtype=np.int64)
    rng = np.random.default_rng(cfg.seed)
    if cfg.loo:
        return np.arange(m, dtype=np.int64)
    if cfg.stratified:
        for c in range(n_classes):
            rows = np.flatnonzero(labels == c)
            if rows.size < folds:
                raise DataError(
                    f"unstratifiable: class {c} has {rows.size} rows < {folds} folds")
            rows = rng.permutation(rows)
            assign[rows] = np.arange(rows.size) % folds
    else:
        order = rng.permutation(m)
        assign[order] = np.arange(m) % folds
    return assign


def naive_bayes_train(values: np.ndarray, labels: np.ndarray, alphabet,
                      n_classes: int, alpha: float = 1.0):
    """Add-alpha naive Bayes on discrete codes.

    Returns (log_priors, per-feature log-conditional tables). All classes in
    0..n_classes-1 get smoothed priors even when absent from the fold.
    """
    if values.shape[0] == 0:
        raise DataError("empty training set")
    m, n = values.shape
    class_counts = np.bincount(labels, minlength=n_classes).astype(float)
    log_prior = np.log(class_counts + alpha) - np.log(m + alpha * n_classes)
    log_cond = []
    for j in range(n):
        k = int(alphabet[j])
        table = np.zeros((n_classes, k))
        np.add.at(table, (labels, values[:, j]), 1.0)
        table = np.log(table + alpha) - np.log(
            class_counts[:, None] + alpha * k)
        log_cond.append(table)
    return log_prior, log_cond


def naive_bayes_predict(model, values: np.ndarray) -> np.ndarray:
    """argmax_c of log prior + sum of log conditionals; ties to smaller c."""
    log_prior, log_cond = model
    scores = np.tile(log_prior, (values.shape[0], 1))
    for j, table in enumerate(log_cond):
        scores += table[:, values[:, j]].T
    return scores.argmax(axis=1)


def knn_predict(train_x: np.ndarray, train_y: np.ndarray, test_x: np.ndarray,
                k: int, n_classes: int) -> np.ndarray:
    """k-nearest neighbours under Hamming distance.

    Distance ties are broken by training-row order (stable sort); vote ties
    go to the smaller class index.
    """
    if train_x.shape[0] == 0:
        raise DataError("empty training set")
    k = min(k, train_x.shape[0])
    preds = np.empty(test_x.shape[0], dtype=np.int64)
    for i in range(test_x.shape[0]):
        dist = (train_x != test_x[i]).sum(axis=1)
        nearest = np.argsort(dist, kind="stable")[:k]
        votes = np.bincount(train_y[nearest], minlength=n_classes)
        preds[i] = int(votes.argmax())
    return preds


def _run_classifier(cfg: CvConfig, train_x, train_y, test_x, alphabet, n_classes):
    if cfg.classifier == "naive-bayes":
        model = naive_bayes_train(train_x, train_y, alphabet, n_classes)
        return naive_bayes_predict(model, test_x)
    return knn_predict(train_x, train_y, test_x, cfg.knn_k, n_classes)


def _check_features(data: DiscreteDataset, features) -> tuple[int, ...]:
    feats = tuple(int(i) for i in features)
    if not feats:
        raise ConfigError("empty feature set")
    if len(set(feats)) != len(feats):
        raise ConfigError(f"duplicate feature indices in {feats}")
    if any(i < 0 or i >= data.n for i in feats):
        raise ConfigError(f"feature index out of range in {feats} (n={data.n})")
    return tuple(sorted(feats))


def cross_validate(data: DiscreteDataset, features, cfg: CvConfig) -> EvalReport:
    """K-fold (or LOO) accuracy of the built-in classifier on ``features``."""
    feats = _check_features(data, features)
    assign = _fold_assignment(data.labels, data.n_classes, cfg)
    folds = int(assign.max()) + 1
    sub = data.values[:, feats]
    alphabet = [data.alphabet[i] for i in feats]
    accs = []
    for f in range(folds):
        test = assign == f
        train = ~test
        preds = _run_classifier(cfg, sub[train], data.labels[train], sub[test],
                                alphabet, data.n_classes)
        accs.append(float((preds == data.labels[test]).mean()))
    return EvalReport(tuple(accs), float(np.mean(accs)), folds,
                      selected_p=len(feats))


def training_error(data: DiscreteDataset, features, cfg: CvConfig | None = None) -> float:
    """Resubstitution error: fit on all rows, score on the same rows."""
    cfg = cfg or CvConfig()
    feats = _check_features(data, features)
    sub = data.values[:, feats]
    alphabet = [data.alphabet[i] for i in feats]
    preds = _run_classifier(cfg, sub, data.labels, sub, alphabet, data.n_classes)
    return float((preds != data.labels).mean())


def p_search(data: DiscreteDataset, selector, p_grid, cfg: CvConfig) -> EvalReport:
    """Accuracy-driven cardinality search.

    ``selector(p)`` returns the feature subset for cardinality p (either a
    SelectionResult or a bare index sequence). Every grid point is
    cross-validated; the report's selected_p minimizes error, ties going to
    the smaller P. classifier_runs is exactly |grid| x folds.
    """
    grid = sorted({int(p) for p in p_grid})
    if not grid:
        raise ConfigError("empty P grid")
    if grid[0] < 1 or grid[-1] > data.n:
        raise ConfigError(f"P grid outside 1..{data.n}: {grid}")
    curve = []
    runs = 0
    for p in grid:
        chosen = selector(p)
        feats = tuple(getattr(chosen, "selected", chosen))
        if len(feats) != p:
            raise DataError(f"selector returned {len(feats)} features for P={p}")
        rep = cross_validate(data, feats, cfg)
        runs += rep.classifier_runs
        curve.append({
            "p": p,
            "selected": [int(i) for i in feats],
            "fold_accuracies": [float(a) for a in rep.fold_accuracies],
            "mean_accuracy": rep.mean_accuracy,
        })
    best = min(curve, key=lambda row: (1.0 - row["mean_accuracy"], row["p"]))
    return EvalReport(tuple(best["fold_accuracies"]), best["mean_accuracy"],
                      runs, selected_p=best["p"], curve=tuple(curve))


def similarity_ratio(sets) -> list[float]:
    """S_i = |set_i intersect set_{i+1}| / |set_i| for consecutive sets."""
    sets = [frozenset(int(i) for i in s) for s in sets]
    if len(sets) < 2:
        raise ConfigError("need at least 2 feature sets")
    for pos, s in enumerate(sets):
        if not s:
            raise ConfigError(f"empty feature set at position {pos}")
    return [len(a & b) / len(a) for a, b in zip(sets[:-1], sets[1:])]


def window_mean(ratios, start: int, length: int) -> float:
    """Mean of ratios[start : start+length] — the windowed stability summary."""
    ratios = [float(r) for r in ratios]
    if length < 1:
        raise ConfigError("window length must be >= 1")
    if start < 0 or start + length > len(ratios):
        raise ConfigError(
            f"window [{start}, {start + length}) outside 0..{len(ratios)}")
    return float(np.mean(ratios[start:start + length]))


def bayes_error(pmf: JointPmf, features=()) -> float:
    """Minimal decision error using only ``features``: 1 - sum_x max_c P(x,c).

    With no features this is 1 - max class prior.
    """
    if pmf.class_var is None:
        raise ConfigError("pmf has no class variable")
    feats = tuple(int(i) for i in features)
    if len(set(feats)) != len(feats):
        raise ConfigError(f"duplicate features in {feats}")
    feature_names = pmf.features
    if any(i < 0 or i >= len(feature_names) for i in feats):
        raise ConfigError(f"feature index out of range in {feats}")
    names = tuple(feature_names[i] for i in feats)
    joint = marginal(pmf, names + (pmf.class_var,))
    ny = pmf.card[pmf.names.index(pmf.class_var)]
    flat = joint.reshape(-1, ny)
    return float(1.0 - flat.max(axis=1).sum())
