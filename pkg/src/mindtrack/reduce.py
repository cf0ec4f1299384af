"""Linear dimensionality reduction: PCA and LDA transformers.

Both estimators follow the sklearn fit/transform contract and expose the
fitted linear map (mean, components, eigenvalues) so projections can be
serialized and shared between the classifier, plots and the tracker.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ._validation import as_matrix, check_dim, check_same_length
from .errors import RankDeficientWarning, SingleClass


def _fix_signs(components: np.ndarray) -> np.ndarray:
    # canonical orientation: the largest-magnitude entry of each component
    # is positive, so refits and replots are reproducible
    out = components.copy()
    for row in out:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return out


class _LinearProjection:
    """Shared transform/serialize behaviour for fitted PCA and LDA."""

    kind = ""
    mean_: np.ndarray
    components_: np.ndarray  # (k, d), rows are components
    eigenvalues_: np.ndarray

    def _check_fitted(self):
        if not hasattr(self, "components_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted")

    def transform(self, X) -> np.ndarray:
        self._check_fitted()
        X = as_matrix(X)
        check_dim(X, self.mean_.shape[0], "X")
        return (X - self.mean_) @ self.components_.T

    def project(self, x) -> np.ndarray:
        """Project a single d-vector to the reduced space."""
        x = np.asarray(x, dtype=np.float64)
        return self.transform(x[None, :])[0]

    def to_dict(self) -> dict:
        self._check_fitted()
        return {
            "kind": self.kind,
            "mean": self.mean_.tolist(),
            "basis": self.components_.T.tolist(),  # d x k, columns are components
            "eigenvalues": self.eigenvalues_.tolist(),
        }


def projection_from_dict(data: dict) -> "PCA | LDA":
    kind = data["kind"]
    if kind == "pca":
        est = PCA(n_components=len(data["eigenvalues"]))
    elif kind == "lda":
        est = LDA(n_components=len(data["eigenvalues"]))
    else:
        raise ValueError(f"unknown projection kind {kind!r}")
    est.mean_ = np.asarray(data["mean"], dtype=float)
    est.components_ = np.asarray(data["basis"], dtype=float).T
    est.eigenvalues_ = np.asarray(data["eigenvalues"], dtype=float)
    return est


class PCA(_LinearProjection, TransformerMixin, BaseEstimator):
    """Principal component analysis via SVD of the centered data matrix."""

    kind = "pca"

    def __init__(self, n_components: int = 2):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = as_matrix(X)
        n, d = X.shape
        if n < 2:
            raise ValueError("PCA needs at least 2 samples")
        k = self.n_components
        if not 1 <= k <= min(n - 1, d):
            raise ValueError(
                f"n_components={k} outside [1, min(n-1, d)] = [1, {min(n - 1, d)}]"
            )
        self.mean_ = X.mean(axis=0)
        _, s, vt = np.linalg.svd(X - self.mean_, full_matrices=False)
        eig = (s ** 2) / (n - 1)
        self.components_ = _fix_signs(vt[:k])
        self.eigenvalues_ = eig[:k]
        self.total_variance_ = float(eig.sum())
        if np.any(self.eigenvalues_ < 1e-12):
            warnings.warn(
                "projection is rank deficient (near-zero eigenvalue)",
                RankDeficientWarning,
                stacklevel=2,
            )
        return self


class LDA(_LinearProjection, TransformerMixin, BaseEstimator):
    """Fisher linear discriminant directions.

    Solves the between-class vs within-class generalized eigenproblem with
    a ridge on the within-class scatter (lambda = ridge * trace(Sw)/d),
    needed because the scatter is singular when d exceeds the sample count.
    """

    kind = "lda"

    def __init__(self, n_components: int = 2, ridge: float = 1e-6):
        self.n_components = n_components
        self.ridge = ridge

    def fit(self, X, y):
        X = as_matrix(X)
        y = np.asarray(y)
        check_same_length(X, y, "X and y")
        classes, y_idx = np.unique(y, return_inverse=True)
        if len(classes) < 2:
            raise SingleClass("LDA needs at least 2 distinct labels")
        n, d = X.shape
        k = min(self.n_components, len(classes) - 1)

        mean = X.mean(axis=0)
        sw = np.zeros((d, d))
        sb = np.zeros((d, d))
        for c in range(len(classes)):
            Xc = X[y_idx == c]
            mu_c = Xc.mean(axis=0)
            centered = Xc - mu_c
            sw += centered.T @ centered
            diff = mu_c - mean
            sb += len(Xc) * np.outer(diff, diff)
        lam = self.ridge * np.trace(sw) / d
        if lam <= 0.0:
            lam = self.ridge
        eigvals, eigvecs = scipy.linalg.eigh(sb, sw + lam * np.eye(d))
        order = np.argsort(eigvals)[::-1][:k]
        directions = eigvecs[:, order].T
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        self.mean_ = mean
        self.components_ = _fix_signs(directions)
        self.eigenvalues_ = eigvals[order]
        self.classes_ = classes
        return self
