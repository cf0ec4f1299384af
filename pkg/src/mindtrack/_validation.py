"""Input validation helpers used by the estimators."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NonFiniteFeature, NonFiniteValue


def as_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce to a 2-D float64 array, rejecting non-finite entries."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NonFiniteFeature(f"{name} contains NaN or infinite values")
    return X


def as_vector(x, name: str = "x") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteValue(f"{name} contains NaN or infinite values")
    return x


def check_dim(x: np.ndarray, expected: int, name: str = "x") -> None:
    got = x.shape[-1]
    if got != expected:
        raise DimensionMismatch(f"{name} has dimension {got}, expected {expected}")


def check_same_length(a, b, names: str = "inputs") -> None:
    if len(a) != len(b):
        raise ValueError(f"{names} have mismatched lengths {len(a)} and {len(b)}")
