"""Input checks shared by the estimator classes."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .model import InvalidParameters


def check_epsilons(X) -> np.ndarray:
    """Accept a 1-D array of inhomogeneities (or an (L, 1) column)."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise InvalidParameters(f"inhomogeneities must be 1-D, got shape {arr.shape}")
    arr = check_array(arr.reshape(-1, 1), ensure_min_samples=1).ravel()
    return arr


def check_sign_vectors(S, L: int) -> np.ndarray:
    """Sign vectors as an (n_states, L) array of +-1; strings of '+'/'-' are accepted."""
    if isinstance(S, str):
        S = [S]
    rows = []
    for row in S if not isinstance(S, np.ndarray) or S.ndim == 2 else [S]:
        if isinstance(row, str):
            row = [1.0 if ch == "+" else -1.0 if ch == "-" else np.nan for ch in row]
        rows.append(row)
    arr = check_array(np.asarray(rows, dtype=float), ensure_all_finite=True)
    if arr.shape[1] != L:
        raise ValueError(f"sign vectors must have {L} entries, got {arr.shape[1]}")
    if not np.all(np.abs(arr) == 1):
        raise ValueError("sign vector entries must be +1 or -1")
    return arr


def check_positive(name: str, value: float) -> float:
    value = float(value)
    if not value > 0:
        raise ValueError(f"{name} must be > 0, got {value}")
    return value
