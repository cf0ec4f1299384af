"""Support vector machines trained with a sequential-minimal-optimization
dual solver, plus Platt probability calibration, minority up-sampling and
grid search.

The binary solver maximises the soft-margin dual

    max  sum(a) - 0.5 * sum_ij a_i a_j y_i y_j K(x_i, x_j)
    s.t. 0 <= a_i <= C_i,  sum_i a_i y_i = 0

by repeatedly updating the maximal-KKT-violating pair until every
violation is below tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from ._validation import as_matrix, check_dim, check_same_length
from .corpus import SEVERITY
from .errors import DegenerateCalibration, SingleClass

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(func):
            return func

        return deco


def kernel_matrix(kernel: str, gamma: float | None,
                  X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    if kernel == "linear":
        return X @ Y.T
    if kernel == "rbf":
        if gamma is None or gamma <= 0:
            raise ValueError("rbf kernel needs gamma > 0")
        sq = (
            (X ** 2).sum(axis=1)[:, None]
            + (Y ** 2).sum(axis=1)[None, :]
            - 2.0 * (X @ Y.T)
        )
        np.clip(sq, 0.0, None, out=sq)
        return np.exp(-gamma * sq)
    raise ValueError(f"unknown kernel {kernel!r}")


@njit(cache=True)
def _smo_loop(K, y, box, tol, max_iter):  # pragma: no cover - jitted
    n = y.shape[0]
    alpha = np.zeros(n)
    F = -y.copy()  # F_i = w.x_i - y_i, bias-free margin residual
    it = 0
    while it < max_iter:
        m_val = -1e300
        M_val = 1e300
        i = -1
        j = -1
        for t in range(n):
            a_t = alpha[t]
            if y[t] > 0.0:
                if a_t < box[t]:
                    v = -F[t]
                    if v > m_val:
                        m_val = v
                        i = t
                if a_t > 0.0:
                    v = -F[t]
                    if v < M_val:
                        M_val = v
                        j = t
            else:
                if a_t > 0.0:
                    v = -F[t]
                    if v > m_val:
                        m_val = v
                        i = t
                if a_t < box[t]:
                    v = -F[t]
                    if v < M_val:
                        M_val = v
                        j = t
        if i < 0 or j < 0 or m_val - M_val < tol:
            break
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if eta < 1e-12:
            eta = 1e-12
        ai_old = alpha[i]
        aj_old = alpha[j]
        aj = aj_old + y[j] * (F[i] - F[j]) / eta
        if y[i] != y[j]:
            low = aj_old - ai_old
            if low < 0.0:
                low = 0.0
            high = box[i] + aj_old - ai_old
            if high > box[j]:
                high = box[j]
        else:
            low = ai_old + aj_old - box[i]
            if low < 0.0:
                low = 0.0
            high = ai_old + aj_old
            if high > box[j]:
                high = box[j]
        if aj < low:
            aj = low
        elif aj > high:
            aj = high
        ai = ai_old + y[i] * y[j] * (aj_old - aj)
        if ai < 0.0:
            ai = 0.0
        elif ai > box[i]:
            ai = box[i]
        d_i = (ai - ai_old) * y[i]
        d_j = (aj - aj_old) * y[j]
        if d_i == 0.0 and d_j == 0.0:
            break
        for t in range(n):
            F[t] += d_i * K[i, t] + d_j * K[j, t]
        alpha[i] = ai
        alpha[j] = aj
        it += 1
    return alpha, F, it


def kkt_gap(K: np.ndarray, y: np.ndarray, alpha: np.ndarray,
            box: np.ndarray) -> float:
    """Largest KKT violation of a dual point, recomputed from scratch."""
    F = (alpha * y) @ K - y
    up = ((y > 0) & (alpha < box)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < box))
    m = np.max(-F[up]) if up.any() else -np.inf
    M = np.min(-F[low]) if low.any() else np.inf
    return float(m - M)


def dual_objective(K: np.ndarray, y: np.ndarray, alpha: np.ndarray) -> float:
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


class SmoBinarySvc(BaseEstimator):
    """Binary soft-margin SVM on labels in {-1, +1}."""

    def __init__(self, C: float = 1.0, kernel: str = "linear",
                 gamma: float | None = None, tol: float = 1e-3,
                 max_iter: int = 1_000_000):
        self.C = C
        self.kernel = kernel
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y, sample_weight=None):
        X = as_matrix(X)
        y = np.asarray(y, dtype=np.float64)
        check_same_length(X, y, "X and y")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("binary labels must be -1 or +1")
        if len(np.unique(y)) < 2:
            raise SingleClass("both labels must be present")
        if self.C <= 0:
            raise ValueError("C must be positive")
        box = np.full(len(y), float(self.C))
        if sample_weight is not None:
            w = np.asarray(sample_weight, dtype=np.float64)
            check_same_length(w, y, "sample_weight and y")
            if np.any(w <= 0):
                raise ValueError("sample weights must be positive")
            box = box * w
        K = kernel_matrix(self.kernel, self.gamma, X, X)
        alpha, F, n_iter = _smo_loop(
            np.ascontiguousarray(K), y, box, float(self.tol), int(self.max_iter)
        )

        free = (alpha > 0.0) & (alpha < box)
        if free.any():
            b = float(np.mean(-F[free]))
        else:
            up = ((y > 0) & (alpha < box)) | ((y < 0) & (alpha > 0))
            low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < box))
            m = np.max(-F[up]) if up.any() else 0.0
            M = np.min(-F[low]) if low.any() else 0.0
            b = float((m + M) / 2.0)

        sv = alpha > 0.0
        self.support_vectors_ = X[sv]
        self.dual_coef_ = alpha[sv] * y[sv]
        self.intercept_ = b
        self.alpha_ = alpha
        self.box_ = box
        self.n_iter_ = int(n_iter)
        self.n_features_ = X.shape[1]
        return self

    def decision_function(self, X) -> np.ndarray:
        if not hasattr(self, "dual_coef_"):
            raise NotFittedError("SmoBinarySvc is not fitted")
        X = as_matrix(X)
        check_dim(X, self.n_features_, "X")
        if len(self.dual_coef_) == 0:
            return np.full(len(X), self.intercept_)
        K = kernel_matrix(self.kernel, self.gamma, X, self.support_vectors_)
        return K @ self.dual_coef_ + self.intercept_

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_function(X) >= 0.0, 1.0, -1.0)


def platt_calibrate(scores, labels, max_iter: int = 200,
                    min_step: float = 1e-10, sigma: float = 1e-12
                    ) -> tuple[float, float]:
    """Fit sigmoid parameters (A, B) so that p = 1 / (1 + exp(A*s + B)).

    Newton iteration on the regularized maximum-likelihood objective with
    the usual smoothed targets, following Platt's method in the
    numerically robust variant of Lin, Lin and Weng.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    pos = y > 0
    n_pos = int(pos.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("calibration needs at least one sample per class")
    if np.ptp(s) == 0.0:
        raise DegenerateCalibration("all decision scores are equal")

    hi = (n_pos + 1.0) / (n_pos + 2.0)
    lo = 1.0 / (n_neg + 2.0)
    t = np.where(pos, hi, lo)

    def objective(a: float, b: float) -> float:
        f = a * s + b
        # log(1 + exp(-|f|)) form avoids overflow on either branch
        return float(
            np.sum(np.where(f >= 0, t * f, (t - 1.0) * f))
            + np.sum(np.log1p(np.exp(-np.abs(f))))
        )

    A = 0.0
    B = math.log((n_neg + 1.0) / (n_pos + 1.0))
    fval = objective(A, B)
    for _ in range(max_iter):
        f = A * s + B
        expm = np.exp(-np.abs(f))
        p = np.where(f >= 0, expm / (1.0 + expm), 1.0 / (1.0 + expm))
        q = 1.0 - p
        d2 = p * q
        h11 = float(np.sum(s * s * d2)) + sigma
        h22 = float(np.sum(d2)) + sigma
        h21 = float(np.sum(s * d2))
        d1 = t - p
        g1 = float(np.sum(s * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < 1e-5 and abs(g2) < 1e-5:
            break
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * dA + g2 * dB
        step = 1.0
        while step >= min_step:
            new_a = A + step * dA
            new_b = B + step * dB
            new_f = objective(new_a, new_b)
            if new_f < fval + 1e-4 * step * gd:
                A, B, fval = new_a, new_b, new_f
                break
            step /= 2.0
        else:
            break
    return A, B


def sigmoid_probability(scores, a: float, b: float) -> np.ndarray:
    f = a * np.asarray(scores, dtype=np.float64) + b
    expm = np.exp(-np.abs(f))
    return np.where(f >= 0, expm / (1.0 + expm), 1.0 / (1.0 + expm))


def class_order(labels: Sequence[str]) -> list[str]:
    """Deterministic class ordering, most severe first.

    Prediction ties break toward the first class in this order, which
    realises the t > e > c rule for the ideology labels.
    """
    return sorted(set(labels), key=lambda lab: (-SEVERITY.get(lab, -1), lab))


def balanced_class_weights(y) -> dict:
    """Per-class weights total / (n_classes * count), as used by the
    balanced-accuracy metric."""
    labels, counts = np.unique(np.asarray(y), return_counts=True)
    total = counts.sum()
    return {lab: total / (len(labels) * cnt) for lab, cnt in zip(labels, counts)}


@dataclass
class _BinaryMember:
    positive: str
    svc: SmoBinarySvc
    platt: tuple[float, float] | None


class SvmClassifier(ClassifierMixin, BaseEstimator):
    """Multi-class SVM: one-vs-rest with calibrated-probability argmax.

    With exactly two classes a single binary machine is trained and the
    negative class probability is the complement. ``class_weight`` may be
    None, "balanced", or a label -> multiplier dict applied to C per
    sample.
    """

    def __init__(self, C: float = 1.0, kernel: str = "linear",
                 gamma: float | None = None, class_weight=None,
                 calibrate: bool = True, calibration_folds: int = 3,
                 tol: float = 1e-3, max_iter: int = 1_000_000, seed: int = 0):
        self.C = C
        self.kernel = kernel
        self.gamma = gamma
        self.class_weight = class_weight
        self.calibrate = calibrate
        self.calibration_folds = calibration_folds
        self.tol = tol
        self.max_iter = max_iter
        self.seed = seed

    def _new_binary(self) -> SmoBinarySvc:
        return SmoBinarySvc(C=self.C, kernel=self.kernel, gamma=self.gamma,
                            tol=self.tol, max_iter=self.max_iter)

    def _sample_weights(self, y: np.ndarray) -> np.ndarray | None:
        if self.class_weight is None:
            return None
        if self.class_weight == "balanced":
            weights = balanced_class_weights(y)
        else:
            weights = dict(self.class_weight)
        return np.array([weights[lab] for lab in y], dtype=np.float64)

    def _calibration_scores(self, X, y_bin, sample_weight) -> np.ndarray:
        """Out-of-fold decision scores for sigmoid fitting.

        Falls back to in-sample scores of the final model when the
        internal split cannot keep both classes in every training part.
        """
        from .evaluate import kfold

        n = len(y_bin)
        k = self.calibration_folds
        counts = np.bincount((y_bin > 0).astype(int), minlength=2)
        if k < 2 or n < 2 * k or counts.min() < k:
            return np.full(n, np.nan)  # sentinel: use in-sample scores
        plan = kfold(n, k, labels=y_bin, seed=self.seed)
        scores = np.empty(n)
        for fold in range(k):
            train_idx, test_idx = plan.split(fold)
            svc = self._new_binary()
            sw = None if sample_weight is None else sample_weight[train_idx]
            svc.fit(X[train_idx], y_bin[train_idx], sample_weight=sw)
            scores[test_idx] = svc.decision_function(X[test_idx])
        return scores

    def _fit_member(self, X, y, positive: str,
                    sample_weight: np.ndarray | None) -> _BinaryMember:
        y_bin = np.where(y == positive, 1.0, -1.0)
        svc = self._new_binary()
        svc.fit(X, y_bin, sample_weight=sample_weight)
        platt = None
        if self.calibrate:
            scores = self._calibration_scores(X, y_bin, sample_weight)
            if np.any(np.isnan(scores)):
                scores = svc.decision_function(X)
            try:
                platt = platt_calibrate(scores, y_bin)
            except DegenerateCalibration:
                if np.ptp(svc.decision_function(X)) == 0.0:
                    raise
                platt = platt_calibrate(svc.decision_function(X), y_bin)
        return _BinaryMember(positive=positive, svc=svc, platt=platt)

    def fit(self, X, y):
        X = as_matrix(X)
        y = np.asarray(y)
        check_same_length(X, y, "X and y")
        classes = class_order(y)
        if len(classes) < 2:
            raise SingleClass("training data holds a single class")
        self.classes_ = classes
        sample_weight = self._sample_weights(y)
        if len(classes) == 2:
            members = [self._fit_member(X, y, classes[0], sample_weight)]
        else:
            members = [self._fit_member(X, y, c, sample_weight) for c in classes]
        self._members = members
        self.n_features_ = X.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "_members"):
            raise NotFittedError("SvmClassifier is not fitted")

    def decision_function(self, X) -> np.ndarray:
        """Raw per-class scores, one column per entry of ``classes_``."""
        self._check_fitted()
        scores = np.column_stack([m.svc.decision_function(X) for m in self._members])
        if len(self.classes_) == 2:
            scores = np.column_stack([scores[:, 0], -scores[:, 0]])
        return scores

    def predict_proba(self, X) -> np.ndarray:
        self._check_fitted()
        cols = []
        for m in self._members:
            s = m.svc.decision_function(X)
            if m.platt is not None:
                cols.append(sigmoid_probability(s, *m.platt))
            else:
                cols.append(sigmoid_probability(s, -1.0, 0.0))
        if len(self.classes_) == 2:
            p = cols[0]
            proba = np.column_stack([p, 1.0 - p])
        else:
            proba = np.column_stack(cols)
            proba /= proba.sum(axis=1, keepdims=True)
        return proba

    def predict(self, X) -> np.ndarray:
        proba = self.predict_proba(X)
        idx = np.argmax(proba, axis=1)
        return np.asarray(self.classes_, dtype=object)[idx]

    def to_dict(self) -> dict:
        self._check_fitted()
        return {
            "classes": list(self.classes_),
            "params": {
                "C": self.C, "kernel": self.kernel, "gamma": self.gamma,
                "class_weight": self.class_weight, "calibrate": self.calibrate,
                "tol": self.tol, "seed": self.seed,
            },
            "members": [
                {
                    "positive": m.positive,
                    "support_vectors": m.svc.support_vectors_.tolist(),
                    "dual_coef": m.svc.dual_coef_.tolist(),
                    "intercept": m.svc.intercept_,
                    "calibration": list(m.platt) if m.platt is not None else None,
                }
                for m in self._members
            ],
            "preprocessing": getattr(self, "preprocessing_", None),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SvmClassifier":
        params = data["params"]
        clf = cls(C=params["C"], kernel=params["kernel"], gamma=params["gamma"],
                  class_weight=params["class_weight"],
                  calibrate=params["calibrate"], tol=params["tol"],
                  seed=params["seed"])
        clf.classes_ = list(data["classes"])
        members = []
        for rec in data["members"]:
            svc = clf._new_binary()
            svc.support_vectors_ = np.asarray(rec["support_vectors"], dtype=float)
            svc.dual_coef_ = np.asarray(rec["dual_coef"], dtype=float)
            svc.intercept_ = float(rec["intercept"])
            svc.n_features_ = svc.support_vectors_.shape[1]
            platt = rec["calibration"]
            members.append(_BinaryMember(
                positive=rec["positive"], svc=svc,
                platt=tuple(platt) if platt is not None else None,
            ))
        clf._members = members
        clf.n_features_ = members[0].svc.n_features_
        if data.get("preprocessing") is not None:
            clf.preprocessing_ = data["preprocessing"]
        return clf


def upsample_indices(y, seed: int = 0) -> np.ndarray:
    """Indices that balance all classes to the majority count.

    Every original index appears at least once; minority classes gain
    extra indices sampled with replacement.
    """
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    labels, counts = np.unique(y, return_counts=True)
    majority = counts.max()
    chunks = []
    for lab, count in zip(labels, counts):
        idx = np.flatnonzero(y == lab)
        chunks.append(idx)
        if count < majority:
            chunks.append(rng.choice(idx, size=majority - count, replace=True))
    return np.concatenate(chunks)


def upsample(X, y, seed: int = 0):
    """Balance class counts by re-sampling minority classes with replacement."""
    X = np.asarray(X)
    y = np.asarray(y)
    check_same_length(X, y, "X and y")
    idx = upsample_indices(y, seed)
    return X[idx], y[idx]


@dataclass(frozen=True)
class GridSpec:
    """Search space for the classifier hyper-parameters."""

    c_values: tuple = tuple(2.0 ** e for e in range(-3, 8))
    gamma_values: tuple = tuple(2.0 ** e for e in range(-7, 4))
    kernels: tuple = ("linear", "rbf")
    pca_components: tuple = (2, 8, 32, 128, None)
    n_folds: int = 10
    metric: str = "balanced_accuracy"
    seed: int = 0

    def validate(self) -> None:
        if not self.c_values or any(c <= 0 for c in self.c_values):
            raise ValueError("c_values must be positive")
        if any(g <= 0 for g in self.gamma_values):
            raise ValueError("gamma_values must be positive")
        if any(k not in ("linear", "rbf") for k in self.kernels):
            raise ValueError("kernels must be 'linear' or 'rbf'")
        if any(p is not None and p < 1 for p in self.pca_components):
            raise ValueError("pca_components must be positive or None")
        if self.n_folds < 2:
            raise ValueError("n_folds must be >= 2")
        if self.metric != "balanced_accuracy":
            raise ValueError(f"unknown metric {self.metric!r}")

    def configs(self) -> list[dict]:
        kernel_pairs = []
        for kern in self.kernels:
            if kern == "linear":
                kernel_pairs.append(("linear", None))
            else:
                kernel_pairs.extend(("rbf", g) for g in self.gamma_values)
        return [
            {"C": c, "kernel": kern, "gamma": g, "pca": p}
            for p in self.pca_components
            for kern, g in kernel_pairs
            for c in self.c_values
        ]


@dataclass
class GridSearchResult:
    best: dict
    table: list[dict]


class ArrayFolds:
    """Fold featurizer over a precomputed feature matrix."""

    def __init__(self, X):
        self.X = as_matrix(X)

    def build(self, train_idx, test_idx):
        return self.X[train_idx], self.X[test_idx]


def _config_sort_key(row: dict) -> tuple:
    return (
        -row["metric"],
        row["C"],
        row["gamma"] if row["gamma"] is not None else 0.0,
        row["pca"] if row["pca"] is not None else math.inf,
        row["kernel"],
    )


def evaluate_config(config: dict, features, y, folds, seed: int,
                    classes: list[str] | None = None,
                    class_weight=None, calibrate: bool = True):
    """Cross-validate one configuration; returns pooled predictions and
    per-class probabilities aligned with the sample order."""
    from .evaluate import balanced_accuracy, confusion
    from .reduce import PCA

    y = np.asarray(y)
    if classes is None:
        classes = class_order(y)
    n = len(y)
    preds = np.empty(n, dtype=object)
    proba = np.zeros((n, len(classes)))
    for fold in range(len(folds.folds)):
        train_idx, test_idx = folds.split(fold)
        X_tr, X_te = features.build(train_idx, test_idx)
        if config.get("pca") is not None:
            reducer = PCA(n_components=config["pca"]).fit(X_tr)
            X_tr = reducer.transform(X_tr)
            X_te = reducer.transform(X_te)
        fold_seed = np.random.SeedSequence([seed, fold]).generate_state(1)[0]
        X_up, y_up = upsample(X_tr, y[train_idx], seed=int(fold_seed))
        clf = SvmClassifier(
            C=config["C"], kernel=config["kernel"], gamma=config.get("gamma"),
            class_weight=class_weight, calibrate=calibrate, seed=int(fold_seed),
        )
        clf.fit(X_up, y_up)
        preds[test_idx] = clf.predict(X_te)
        p = clf.predict_proba(X_te)
        for col, lab in enumerate(clf.classes_):
            proba[test_idx, classes.index(lab)] = p[:, col]
    cm = confusion(y, preds, classes)
    return balanced_accuracy(cm), preds, proba, cm


def grid_search(spec: GridSpec, data, labels, *, classes=None,
                class_weight=None, calibrate: bool = True) -> GridSearchResult:
    """Evaluate every configuration on a shared fold plan; the metric is
    pooled-confusion balanced accuracy and ties break toward smaller C,
    smaller gamma and fewer PCA components."""
    from .evaluate import kfold

    spec.validate()
    y = np.asarray(labels)
    features = data if hasattr(data, "build") else ArrayFolds(data)
    folds = kfold(len(y), spec.n_folds, labels=y, seed=spec.seed)
    table = []
    for config in spec.configs():
        row = dict(config)
        try:
            metric, _, _, _ = evaluate_config(
                config, features, y, folds, spec.seed,
                classes=classes, class_weight=class_weight, calibrate=calibrate,
            )
            row["metric"] = metric
            row["error"] = ""
        except Exception as exc:  # noqa: BLE001 - failed cells stay in the table
            row["metric"] = float("nan")
            row["error"] = f"{type(exc).__name__}: {exc}"
        table.append(row)
    valid = [row for row in table if row["error"] == ""]
    if not valid:
        raise RuntimeError("every grid configuration failed")
    best = min(valid, key=_config_sort_key)
    return GridSearchResult(best=dict(best), table=table)
