"""Weighted Gaussian Lasso by cyclic coordinate descent.

The objective minimized for a weighted sample with multiplicities ``n_i`` over
its distinct rows is::

    (1/n) * sum_i n_i * (y_i - b0 - x_i' beta)^2 + lam * ||beta||_1,

with ``n = sum_i n_i``. This is exactly the objective of the expanded sample in
which row ``i`` is repeated ``n_i`` times, so a size-n resample costs only as
much as its distinct rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from . import _kernels
from .core import (
    GAUSSIAN,
    LASSO,
    FitResult,
    GroupedDataset,
    GroupStructure,
    PenaltyConfig,
    selected_groups,
)
from .exceptions import ZeroWeightTotal
from .resample import WeightedSample
from .validation import check_sample_weight, check_xy


@dataclass(frozen=True)
class CcdSettings:
    max_sweeps: int = 10_000
    tol: float = 1e-7
    active_set: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")


def soft_threshold(z, t):
    """``sign(z) * max(|z| - t, 0)``, elementwise."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("threshold must be nonnegative")
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def weighted_arrays(d: GroupedDataset, w: WeightedSample | None):
    """Distinct rows of ``w`` as (Fortran-ordered x, y, float weights)."""
    if w is None:
        w = WeightedSample.full(d.n)
    weights = np.asarray(w.weights, dtype=float)
    if weights.sum() <= 0:
        raise ZeroWeightTotal("resample weights sum to zero")
    idx = np.asarray(w.indices)
    x = np.asfortranarray(d.x[idx], dtype=float)
    y = np.ascontiguousarray(d.y[idx], dtype=float)
    return x, y, weights


def lasso_path_solve(x, y, weights, lam, beta=None, settings=None):
    """Run CCD on raw arrays. Returns ``(beta, sweeps, converged)``."""
    settings = settings or CcdSettings()
    p = x.shape[1]
    beta = np.zeros(p + 1) if beta is None else np.array(beta, dtype=float)
    sweeps, converged = _kernels.ccd_lasso(
        np.asfortranarray(x, dtype=float), np.ascontiguousarray(y, dtype=float),
        np.ascontiguousarray(weights, dtype=float), float(lam), beta,
        int(settings.max_sweeps), float(settings.tol), bool(settings.active_set),
    )
    return beta, int(sweeps), bool(converged)


def fit_lasso_weighted(
    d: GroupedDataset,
    w: WeightedSample | None,
    penalty: PenaltyConfig,
    settings: CcdSettings | None = None,
    beta_init=None,
) -> FitResult:
    """Lasso fit on a weighted sample of ``d``.

    ``selected`` in the result is reported per group of ``d.groups`` (for
    singleton groups this is the per-coefficient nonzero indicator).
    """
    if d.family != GAUSSIAN:
        raise ValueError("the Lasso solver handles the Gaussian family only")
    if penalty.kind != LASSO:
        raise ValueError("penalty kind must be 'lasso'")
    x, y, weights = weighted_arrays(d, w)
    beta, sweeps, converged = lasso_path_solve(
        x, y, weights, penalty.lam, beta_init, settings
    )
    obj = float(_kernels.lasso_objective(x, y, weights, beta, penalty.lam))
    return FitResult(
        beta=beta,
        selected=selected_groups(beta, d.groups),
        objective=obj,
        iterations=sweeps,
        converged=converged,
        lam=float(penalty.lam),
    )


def lasso_gradient(x, y, weights, beta) -> np.ndarray:
    """Gradient of the weighted squared-error term, intercept first."""
    r = y - beta[0] - x @ beta[1:]
    f = -2.0 * weights * r / weights.sum()
    return np.concatenate([[f.sum()], x.T @ f])


def kkt_check_lasso(d: GroupedDataset, w, penalty: PenaltyConfig, beta) -> float:
    """Largest violation of the Lasso optimality conditions at ``beta``."""
    x, y, weights = weighted_arrays(d, w)
    return LassoProblem(x, y, weights).kkt(beta, penalty.lam)


class WeightedLasso(RegressorMixin, BaseEstimator):
    """Lasso regression with integer or real sample weights.

    Minimizes ``sum(w * r**2) / sum(w) + alpha * ||coef||_1`` with an
    unpenalized intercept. Note the absence of the usual factor 1/2, so
    ``alpha`` here equals twice scikit-learn's ``Lasso`` alpha.
    """

    def __init__(self, alpha=1.0, max_sweeps=10_000, tol=1e-7,
                 active_set=True, warm_start=False):
        self.alpha = alpha
        self.max_sweeps = max_sweeps
        self.tol = tol
        self.active_set = active_set
        self.warm_start = warm_start

    def fit(self, X, y, sample_weight=None):
        X, y = check_xy(X, y)
        weights = check_sample_weight(sample_weight, X.shape[0])
        init = None
        if self.warm_start and hasattr(self, "coef_") and len(self.coef_) == X.shape[1]:
            init = np.concatenate([[self.intercept_], self.coef_])
        settings = CcdSettings(self.max_sweeps, self.tol, self.active_set)
        beta, sweeps, converged = lasso_path_solve(
            X, y, weights, self.alpha, init, settings
        )
        self.intercept_ = beta[0]
        self.coef_ = beta[1:]
        self.n_iter_ = sweeps
        self.converged_ = converged
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X, _ = check_xy(X, None, n_features=self.n_features_in_)
        return self.intercept_ + X @ self.coef_

    def to_result(self, groups: GroupStructure | None = None) -> FitResult:
        check_is_fitted(self, "coef_")
        groups = groups or GroupStructure.singletons(len(self.coef_))
        beta = np.concatenate([[self.intercept_], self.coef_])
        return FitResult(beta, selected_groups(beta, groups), float("nan"),
                         self.n_iter_, self.converged_, lam=self.alpha)


class LassoProblem:
    """A weighted Lasso problem prepared for repeated solves along a path."""

    def __init__(self, x, y, weights, groups: GroupStructure | None = None,
                 settings: CcdSettings | None = None):
        self.x = np.asfortranarray(x, dtype=float)
        self.y = np.ascontiguousarray(y, dtype=float)
        self.w = np.ascontiguousarray(weights, dtype=float)
        self.groups = groups or GroupStructure.singletons(self.x.shape[1])
        self.settings = settings or CcdSettings()

    @property
    def p(self):
        return self.x.shape[1]

    def lambda_max(self):
        if self.p == 0:
            return 0.0
        ybar = self.w @ self.y / self.w.sum()
        grad = self.x.T @ (self.w * (self.y - ybar)) * 2.0 / self.w.sum()
        return float(np.max(np.abs(grad)))

    def solve(self, lam, beta_init=None, settings=None):
        beta, sweeps, converged = lasso_path_solve(
            self.x, self.y, self.w, lam, beta_init, settings or self.settings
        )
        return FitResult(
            beta=beta,
            selected=selected_groups(beta, self.groups),
            objective=float(_kernels.lasso_objective(self.x, self.y, self.w, beta, lam)),
            iterations=sweeps,
            converged=converged,
            lam=float(lam),
        )

    def kkt(self, beta, lam):
        grad = lasso_gradient(self.x, self.y, self.w, np.asarray(beta, dtype=float))
        coef, gc = np.asarray(beta)[1:], grad[1:]
        viol = np.where(
            coef != 0,
            np.abs(gc + lam * np.sign(coef)),
            np.maximum(np.abs(gc) - lam, 0.0),
        )
        return float(max(abs(grad[0]), viol.max(initial=0.0)))
