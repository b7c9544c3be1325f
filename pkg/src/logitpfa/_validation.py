"""Input validation helpers built on top of scikit-learn's."""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import DegenerateInput, InvalidThreshold, NotSymmetric, ShapeMismatch


def check_matrix(X, *, min_rows: int = 1) -> np.ndarray:
    """Return ``X`` as a finite 2-D float64 array with at least ``min_rows`` rows."""
    try:
        X = check_array(X, dtype=np.float64, ensure_all_finite=True,
                        ensure_min_samples=min_rows)
    except ValueError as exc:
        raise DegenerateInput(str(exc)) from exc
    return X


def check_binary_outcome(y, n: int | None = None) -> np.ndarray:
    """Return ``y`` as a float vector of 0/1 values, optionally of length ``n``."""
    y = np.asarray(y)
    if y.ndim == 2 and y.shape[1] == 1:
        y = y[:, 0]
    if y.ndim != 1:
        raise ShapeMismatch(f"outcome must be one-dimensional, got shape {y.shape}")
    if n is not None and y.shape[0] != n:
        raise ShapeMismatch(f"outcome has {y.shape[0]} entries, expected {n}")
    if y.dtype == bool:
        return y.astype(float)
    try:
        y = y.astype(float)
    except (TypeError, ValueError) as exc:
        raise DegenerateInput("outcome must be coded 0/1") from exc
    if not np.all((y == 0.0) | (y == 1.0)):
        raise DegenerateInput("outcome must be coded 0/1")
    return y


def check_threshold(t, *, allow_zero: bool = True) -> float:
    if not isinstance(t, numbers.Real) or isinstance(t, bool):
        raise InvalidThreshold(f"threshold must be a real number, got {t!r}")
    t = float(t)
    lo_ok = t >= 0.0 if allow_zero else t > 0.0
    if not (lo_ok and t <= 1.0):
        interval = "[0, 1]" if allow_zero else "(0, 1]"
        raise InvalidThreshold(f"threshold {t} outside {interval}")
    return t


def check_alpha(alpha, *, upper_inclusive: bool = False) -> float:
    alpha = float(alpha)
    hi_ok = alpha <= 1.0 if upper_inclusive else alpha < 1.0
    if not (alpha > 0.0 and hi_ok):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def check_square_symmetric(A, *, name: str = "matrix", atol: float = 1e-10) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got shape {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if not np.allclose(A, A.T, rtol=0.0, atol=atol * scale):
        raise NotSymmetric(f"{name} is not symmetric")
    return A
