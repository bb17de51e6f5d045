"""Input checking helpers for the estimator classes."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array

from .core import BINOMIAL, GroupStructure
from .exceptions import BadResponse, DimensionMismatch, ZeroWeightTotal


def check_xy(X, y, n_features=None, allow_empty_features=False):
    X = check_array(
        X, dtype=np.float64, ensure_2d=True,
        ensure_min_features=0 if allow_empty_features else 1,
    )
    if n_features is not None and X.shape[1] != n_features:
        raise DimensionMismatch(
            f"X has {X.shape[1]} features, expected {n_features}"
        )
    if y is None:
        return X, None
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] != X.shape[0]:
        raise DimensionMismatch(
            f"y has {y.shape[0]} entries but X has {X.shape[0]} rows"
        )
    if not np.all(np.isfinite(y)):
        raise BadResponse("y contains non-finite values")
    return X, y


def check_binary(y):
    y = np.asarray(y, dtype=np.float64)
    if not np.all((y == 0) | (y == 1)):
        raise BadResponse(f"{BINOMIAL} response must contain only 0 and 1")
    return y


def check_sample_weight(sample_weight, n):
    if sample_weight is None:
        return np.ones(n)
    w = np.asarray(sample_weight, dtype=np.float64).ravel()
    if w.shape[0] != n:
        raise DimensionMismatch("sample_weight length does not match X")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("sample_weight must be finite and nonnegative")
    if w.sum() <= 0:
        raise ZeroWeightTotal("sample_weight sums to zero")
    return w


def check_groups(groups, p) -> GroupStructure:
    """Accept a GroupStructure, a list of index lists, or a per-column label vector."""
    if groups is None:
        gs = GroupStructure.singletons(p)
    elif isinstance(groups, GroupStructure):
        gs = groups
    else:
        groups = list(groups)
        if len(groups) == p and all(np.ndim(g) == 0 for g in groups):
            gs = GroupStructure.from_labels(groups)
        else:
            gs = GroupStructure(groups)
    gs.check(p)
    return gs
