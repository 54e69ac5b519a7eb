"""Small input checks shared across modules."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils import check_array


def check_positive(value, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return value


def check_non_negative(value, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a non-negative finite number, got {value!r}")
    return value


def check_unit_interval(value, name: str) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def check_int(value, name: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        else:
            raise TypeError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_uniform_axis(axis, name: str = "grid", min_length: int = 2) -> np.ndarray:
    """Return ``axis`` as a float array after checking it is uniform and increasing."""
    axis = np.asarray(axis, dtype=float)
    if axis.ndim != 1 or axis.size < min_length:
        raise ValueError(f"{name} must be 1-D with at least {min_length} points")
    steps = np.diff(axis)
    step = steps.mean()
    if step <= 0 or not np.allclose(steps, step, rtol=1e-9, atol=1e-12 * abs(step)):
        raise ValueError(f"{name} must be uniform and increasing")
    return axis


def check_counts(X) -> np.ndarray:
    """Validate an (n, 3) array of [N_minus, N_plus, N_total] rows."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != 3:
        raise ValueError(f"counts must have 3 columns [n_minus, n_plus, n_total], got {X.shape[1]}")
    if np.any(X < 0) or np.any(X != np.round(X)):
        raise ValueError("counts must be non-negative integers")
    if np.any(X[:, 0] + X[:, 1] > X[:, 2]):
        raise ValueError("n_minus + n_plus must not exceed n_total")
    return X.astype(np.int64)


def check_tags(X) -> np.ndarray:
    """Validate frequency tags given as (n,) or (n, 1)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 2 and X.shape[1] == 1:
        X = X[:, 0]
    X = check_array(X.reshape(-1, 1), dtype=np.float64, ensure_min_samples=1)[:, 0]
    return X
