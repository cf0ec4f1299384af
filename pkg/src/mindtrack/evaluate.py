"""Cross-validation folds, confusion matrices, balanced accuracy, ROC/AUC
and the end-to-end classification experiments.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus
from .errors import (
    EmptyClassRow,
    LabelOutsideClassList,
    MissingLabel,
    SingleClass,
    TooFewSamples,
)
from .featurize import (
    EmbeddingMatrix,
    build_vocabulary,
    count_matrix,
    default_stopwords,
    hash_encode,
)


@dataclass(frozen=True)
class FoldPlan:
    """Disjoint test-index lists covering 0..n-1 exactly once."""

    folds: tuple
    n: int
    seed: int
    stratified: bool

    def split(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        test_idx = self.folds[fold]
        mask = np.ones(self.n, dtype=bool)
        mask[test_idx] = False
        return np.flatnonzero(mask), test_idx


def kfold(n: int, k: int, labels=None, seed: int = 0) -> FoldPlan:
    """Shuffled k-fold assignment; stratified when labels are given.

    Fold sizes differ by at most one and, in stratified mode, per-fold
    class counts differ by at most one as well.
    """
    if k < 2 or k > n:
        raise TooFewSamples(f"need 2 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    if labels is None:
        perm = rng.permutation(n)
        for part, chunk in enumerate(np.array_split(perm, k)):
            folds[part].extend(chunk.tolist())
    else:
        labels = np.asarray(labels)
        if len(labels) != n:
            raise ValueError("labels length must equal n")
        offset = 0
        # deal each class cyclically; rotating the start keeps total fold
        # sizes within one of each other across classes
        for lab in np.unique(labels):
            idx = rng.permutation(np.flatnonzero(labels == lab))
            for i, sample in enumerate(idx):
                folds[(offset + i) % k].append(int(sample))
            offset = (offset + len(idx)) % k
    return FoldPlan(
        folds=tuple(np.array(sorted(f), dtype=np.int64) for f in folds),
        n=n,
        seed=seed,
        stratified=labels is not None,
    )


@dataclass(frozen=True)
class ConfusionMatrix:
    classes: tuple
    counts: np.ndarray  # rows = actual, cols = predicted

    @property
    def proportions(self) -> np.ndarray:
        totals = self.counts.sum(axis=1, keepdims=True).astype(float)
        out = np.zeros_like(self.counts, dtype=float)
        np.divide(self.counts, totals, out=out, where=totals > 0)
        return out

    def accuracy(self) -> float:
        return float(np.trace(self.counts) / self.counts.sum())


def confusion(actual, predicted, classes) -> ConfusionMatrix:
    actual = np.asarray(actual)
    predicted = np.asarray(predicted)
    if len(actual) != len(predicted):
        raise ValueError("actual and predicted must have equal length")
    classes = tuple(classes)
    index = {lab: i for i, lab in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for a, p in zip(actual, predicted):
        if a not in index:
            raise LabelOutsideClassList(f"actual label {a!r} not in class list")
        if p not in index:
            raise LabelOutsideClassList(f"predicted label {p!r} not in class list")
        counts[index[a], index[p]] += 1
    return ConfusionMatrix(classes=classes, counts=counts)


def balanced_accuracy(cm: ConfusionMatrix) -> float:
    """Mean per-class recall; weights every class equally regardless of
    its frequency."""
    totals = cm.counts.sum(axis=1)
    if np.any(totals == 0):
        empty = [cm.classes[i] for i in np.flatnonzero(totals == 0)]
        raise EmptyClassRow(f"no samples for classes {empty}")
    recalls = np.diag(cm.counts) / totals
    return float(recalls.mean())


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray  # predict positive iff score >= threshold


def roc(scores, labels) -> RocCurve:
    """ROC curve swept over all distinct score thresholds.

    ``labels`` is any array where truthy / positive marks the positive
    class. Tied scores collapse into single steps.
    """
    scores = np.asarray(scores, dtype=np.float64)
    pos = np.asarray(labels) > 0
    n_pos = int(pos.sum())
    n_neg = len(pos) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("ROC needs both classes present")
    order = np.argsort(-scores, kind="stable")
    s_sorted = scores[order]
    pos_sorted = pos[order]
    fpr = [0.0]
    tpr = [0.0]
    thresholds = [np.inf]
    tp = fp = 0
    i = 0
    while i < len(s_sorted):
        j = i
        while j < len(s_sorted) and s_sorted[j] == s_sorted[i]:
            tp += int(pos_sorted[j])
            fp += int(~pos_sorted[j])
            j += 1
        fpr.append(fp / n_neg)
        tpr.append(tp / n_pos)
        thresholds.append(float(s_sorted[i]))
        i = j
    return RocCurve(
        fpr=np.array(fpr), tpr=np.array(tpr), thresholds=np.array(thresholds)
    )


_trapezoid = getattr(np, "trapezoid", None) or np.trapz


def auc(curve: RocCurve) -> float:
    """Trapezoidal area under the ROC curve."""
    return float(_trapezoid(curve.tpr, curve.fpr))


TASKS = ("threeway", "detect_terrorist", "detect_extremist")


@dataclass(frozen=True)
class FeatureSpec:
    """How quote text becomes classifier input."""

    kind: str  # unigram | bigram | embedding | hash
    embeddings: EmbeddingMatrix | None = None
    stopwords: frozenset | None = None
    hash_dim: int = 64
    hash_seed: int = 0

    def validate(self) -> None:
        if self.kind not in ("unigram", "bigram", "embedding", "hash"):
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.kind == "embedding" and self.embeddings is None:
            raise ValueError("embedding features need an embedding matrix")


class NgramFolds:
    """Fold featurizer that learns the vocabulary inside each training
    fold, so test quotes only contribute known n-grams."""

    def __init__(self, quotes, n: int, stopwords=None):
        self.quotes = list(quotes)
        self.n = n
        self.stopwords = stopwords if stopwords is not None else default_stopwords()
        self._cache: dict[bytes, tuple[np.ndarray, np.ndarray]] = {}

    def build(self, train_idx, test_idx):
        key = np.asarray(train_idx).tobytes()
        if key not in self._cache:
            train_quotes = [self.quotes[i] for i in train_idx]
            vocab = build_vocabulary(train_quotes, self.n, self.stopwords)
            X_tr = count_matrix(train_quotes, vocab, self.stopwords)
            X_te = count_matrix([self.quotes[i] for i in test_idx],
                                vocab, self.stopwords)
            self._cache[key] = (X_tr, X_te)
        return self._cache[key]


def feature_rows(quotes, spec: FeatureSpec):
    """Precomputed feature matrix for kinds that need no fold-local state,
    or an NgramFolds featurizer otherwise."""
    spec.validate()
    if spec.kind == "embedding":
        return spec.embeddings.matrix([q.id for q in quotes])
    if spec.kind == "hash":
        return np.stack([hash_encode(q.text, spec.hash_dim, spec.hash_seed)
                         for q in quotes])
    return NgramFolds(quotes, 1 if spec.kind == "unigram" else 2, spec.stopwords)


def task_labels(task: str, quotes) -> tuple[list, np.ndarray, list[str], str, int]:
    """Quotes, task labels, report class order, positive class and the
    number of quotes excluded by the task definition."""
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}, expected one of {TASKS}")
    for q in quotes:
        if q.label is None:
            raise MissingLabel(f"quote {q.id!r} has no label")
    if task == "threeway":
        kept = list(quotes)
        y = np.array([q.label for q in kept], dtype=object)
        return kept, y, ["c", "e", "t"], "t", 0
    if task == "detect_terrorist":
        kept = list(quotes)
        y = np.array(["t" if q.label == "t" else "ce" for q in kept], dtype=object)
        return kept, y, ["ce", "t"], "t", 0
    kept = [q for q in quotes if q.label != "t"]
    y = np.array([q.label for q in kept], dtype=object)
    return kept, y, ["c", "e"], "e", len(quotes) - len(kept)


@dataclass
class ExperimentReport:
    task: str
    classes: list[str]
    positive: str
    n_used: int
    n_excluded: int
    seed: int
    best: dict
    grid_table: list[dict]
    confusion: ConfusionMatrix
    balanced_accuracy: float
    quote_ids: list[str]
    y: np.ndarray
    predictions: np.ndarray
    proba: np.ndarray  # columns follow ``classes``
    roc: RocCurve | None
    auc: float | None

    def positive_auc(self) -> float:
        """AUC of the positive class probability against positive-vs-rest,
        defined for every task."""
        scores = self.proba[:, self.classes.index(self.positive)]
        return auc(roc(scores, self.y == self.positive))


def run_experiment(corpus: Corpus, features: FeatureSpec, task: str,
                   grid, seed: int = 0) -> ExperimentReport:
    """Grid-search the classifier with k-fold CV and report pooled results.

    Preprocessing (vocabulary, PCA) and minority up-sampling happen inside
    each training fold. For binary tasks the pooled out-of-fold calibrated
    probabilities give the ROC curve and AUC.
    """
    from .svm import class_order, evaluate_config, grid_search

    quotes, y, classes, positive, n_excluded = task_labels(task, corpus)
    spec = dataclasses.replace(grid, seed=seed)
    features_data = feature_rows(quotes, features)
    result = grid_search(spec, features_data, y, classes=class_order(y))

    config = {k: result.best[k] for k in ("C", "kernel", "gamma", "pca")}
    folds = kfold(len(y), spec.n_folds, labels=y, seed=seed)
    from .svm import ArrayFolds

    feats = features_data if hasattr(features_data, "build") else ArrayFolds(features_data)
    _, preds, proba_raw, _ = evaluate_config(
        config, feats, y, folds, seed, classes=class_order(y)
    )
    # reorder probability columns into report class order
    fitted_order = class_order(y)
    proba = np.column_stack(
        [proba_raw[:, fitted_order.index(lab)] for lab in classes]
    )
    cm = confusion(y, preds, classes)
    report = ExperimentReport(
        task=task,
        classes=classes,
        positive=positive,
        n_used=len(y),
        n_excluded=n_excluded,
        seed=seed,
        best=dict(result.best),
        grid_table=result.table,
        confusion=cm,
        balanced_accuracy=balanced_accuracy(cm),
        quote_ids=[q.id for q in quotes],
        y=y,
        predictions=preds,
        proba=proba,
        roc=None,
        auc=None,
    )
    if len(classes) == 2:
        scores = proba[:, classes.index(positive)]
        curve = roc(scores, y == positive)
        report.roc = curve
        report.auc = auc(curve)
    return report
