"""Weighted Group Lasso for squared-error and logistic loss.

Objective over a weighted sample (multiplicities ``n_i``, ``n = sum n_i``)::

    (1/n) sum_i n_i loss(y_i, eta_i) + lam * sum_g s(df_g) ||beta_g||_2

with ``eta_i = b0 + x_i' beta``; ``loss`` is ``(y - eta)^2`` or the negative
Bernoulli log-likelihood ``log(1 + exp(eta)) - y * eta``. Blocks are updated in
ascending group order by group soft-thresholding of a quadratic majorizer
whose curvature is the largest eigenvalue of the weighted block Gram matrix.
The logistic loss is handled by proximal Newton steps: each step builds the
weighted quadratic model at the current fit, minimizes it with the same block
descent, and backtracks until the objective decreases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from . import _kernels
from .core import (
    BINOMIAL,
    GAUSSIAN,
    GROUP_LASSO,
    FitResult,
    GroupedDataset,
    GroupStructure,
    PenaltyConfig,
    RESCALE,
    selected_groups,
)
from .lasso import weighted_arrays
from .validation import check_binary, check_groups, check_sample_weight, check_xy


@dataclass(frozen=True)
class BcdSettings:
    max_outer: int = 5_000
    tol: float = 1e-6
    max_inner: int = 50
    max_passes: int = 1_000
    plateau: float = 1e-9
    separation_bound: float = 1e4
    active_set: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration limits must be at least 1")


def _link_loss(family):
    return _kernels.LOGISTIC_LOSS if family == BINOMIAL else _kernels.GAUSSIAN_LOSS


class BlockProblem:
    """A weighted Group Lasso problem prepared for repeated solves.

    Columns are permuted once so every group is contiguous; coefficients are
    returned in the caller's original column order.
    """

    def __init__(self, x, y, weights, groups: GroupStructure, pen, family,
                 settings: BcdSettings | None = None, report_groups=None):
        self.groups = groups
        self.report_groups = report_groups or groups
        self.settings = settings or BcdSettings()
        self.family = family
        self.loss = _link_loss(family)
        self.order = (
            np.concatenate(groups.groups) if groups.n_groups else np.zeros(0, int)
        )
        self.starts = np.concatenate([[0], np.cumsum(groups.df)]).astype(np.int64)
        self.x = np.asfortranarray(np.asarray(x, dtype=float)[:, self.order])
        self.y = np.ascontiguousarray(y, dtype=float)
        self.w = np.ascontiguousarray(weights, dtype=float)
        self.wsum = self.w.sum()
        self.pen = np.ascontiguousarray(pen, dtype=float)

    @property
    def p(self):
        return self.x.shape[1]

    def _to_internal(self, beta):
        beta = np.asarray(beta, dtype=float)
        return np.concatenate([[beta[0]], beta[1:][self.order]])

    def _to_external(self, beta_int):
        out = np.empty_like(beta_int)
        out[0] = beta_int[0]
        out[1:][self.order] = beta_int[1:]
        return out

    def null_intercept(self):
        ybar = float(self.w @ self.y / self.wsum)
        if self.loss == _kernels.GAUSSIAN_LOSS:
            return ybar
        ybar = min(max(ybar, 1e-12), 1 - 1e-12)
        return float(np.log(ybar / (1 - ybar)))

    def gradient(self, beta):
        """Gradient of the smooth loss term in original column order."""
        b = self._to_internal(beta)
        eta = b[0] + self.x @ b[1:]
        if self.loss == _kernels.GAUSSIAN_LOSS:
            f = -2.0 * self.w * (self.y - eta) / self.wsum
        else:
            mu = np.exp(-np.logaddexp(0.0, -eta))
            f = self.w * (mu - self.y) / self.wsum
        g_int = np.concatenate([[f.sum()], self.x.T @ f])
        return self._to_external(g_int)

    def objective(self, beta, lam):
        return float(_kernels.group_objective(
            self.x, self.y, self.w, self._to_internal(beta), float(lam),
            self.starts, self.pen, self.loss,
        ))

    def lambda_max(self):
        beta = np.zeros(self.p + 1)
        beta[0] = self.null_intercept()
        grad = self.gradient(beta)[1:]
        vals = [
            np.linalg.norm(grad[g]) / s if s > 0 else 0.0
            for g, s in zip(self.groups.groups, self.pen)
        ]
        return float(max(vals, default=0.0))

    def solve(self, lam, beta_init=None, settings: BcdSettings | None = None):
        settings = settings or self.settings
        if beta_init is None:
            b = np.zeros(self.p + 1)
            b[0] = self.null_intercept()
        else:
            b = self._to_internal(beta_init)
        if self.loss == _kernels.GAUSSIAN_LOSS:
            passes, converged = _kernels.bcd_gaussian(
                self.x, self.y, self.w, float(lam), b, self.starts, self.pen,
                int(settings.max_outer), int(settings.max_inner),
                float(settings.tol), bool(settings.active_set),
            )
            separated = False
        else:
            passes, _, converged, separated = _kernels.newton_logistic(
                self.x, self.y, self.w, float(lam), b, self.starts, self.pen,
                int(settings.max_outer), int(settings.max_passes),
                int(settings.max_inner), float(settings.tol),
                float(settings.plateau), float(settings.separation_bound),
                bool(settings.active_set),
            )
        beta = self._to_external(b)
        obj = self.objective(beta, lam)
        converged = bool(converged) and not separated and np.isfinite(obj)
        return FitResult(
            beta=beta,
            selected=selected_groups(beta, self.report_groups),
            objective=obj,
            iterations=int(passes),
            converged=converged,
            separated=bool(separated),
            lam=float(lam),
        )

    def kkt(self, beta, lam):
        beta = np.asarray(beta, dtype=float)
        grad = self.gradient(beta)
        worst = abs(grad[0])
        gc, coef = grad[1:], beta[1:]
        for g, s in zip(self.groups.groups, self.pen):
            bg = coef[g]
            nb = np.linalg.norm(bg)
            if nb == 0:
                v = max(np.linalg.norm(gc[g]) - lam * s, 0.0)
            else:
                v = np.linalg.norm(gc[g] + lam * s * bg / nb)
            worst = max(worst, v)
        return float(worst)


def make_problem(d: GroupedDataset, w, penalty: PenaltyConfig) -> BlockProblem:
    x, y, weights = weighted_arrays(d, w)
    return BlockProblem(x, y, weights, d.groups, penalty.group_weights(d.groups), d.family)


def fit_grouplasso_logistic(d, w, penalty: PenaltyConfig, settings=None,
                            beta_init=None) -> FitResult:
    """Logistic Group Lasso on a weighted sample of a binomial dataset."""
    if d.family != BINOMIAL:
        raise ValueError("logistic Group Lasso needs the binomial family")
    if penalty.kind != GROUP_LASSO:
        raise ValueError("penalty kind must be 'group_lasso'")
    return make_problem(d, w, penalty).solve(penalty.lam, beta_init, settings)


def group_lasso_gaussian(d, w, penalty: PenaltyConfig, settings=None,
                         beta_init=None) -> FitResult:
    """Squared-error Group Lasso on a weighted sample of a Gaussian dataset."""
    if d.family != GAUSSIAN:
        raise ValueError("Gaussian Group Lasso needs the gaussian family")
    if penalty.kind != GROUP_LASSO:
        raise ValueError("penalty kind must be 'group_lasso'")
    return make_problem(d, w, penalty).solve(penalty.lam, beta_init, settings)


def kkt_check_grouplasso(d, w, penalty: PenaltyConfig, beta) -> float:
    """Largest violation of the block optimality conditions at ``beta``."""
    return make_problem(d, w, penalty).kkt(beta, penalty.lam)


class _BaseGroupLasso(BaseEstimator):
    _family = GAUSSIAN

    def __init__(self, groups=None, alpha=1.0, rescale="sqrt", max_outer=5_000,
                 tol=1e-6, max_inner=50, warm_start=False):
        self.groups = groups
        self.alpha = alpha
        self.rescale = rescale
        self.max_outer = max_outer
        self.tol = tol
        self.max_inner = max_inner
        self.warm_start = warm_start

    def _check_target(self, y):
        return y

    def fit(self, X, y, sample_weight=None):
        X, y = check_xy(X, y)
        y = self._check_target(y)
        weights = check_sample_weight(sample_weight, X.shape[0])
        gs = check_groups(self.groups, X.shape[1])
        f = RESCALE[self.rescale] if isinstance(self.rescale, str) else self.rescale
        problem = BlockProblem(X, y, weights, gs, f(gs.df), self._family)
        init = None
        if self.warm_start and hasattr(self, "coef_") and len(self.coef_) == X.shape[1]:
            init = np.concatenate([[self.intercept_], self.coef_])
        settings = BcdSettings(self.max_outer, self.tol, self.max_inner)
        res = problem.solve(self.alpha, init, settings)
        self.intercept_ = res.beta[0]
        self.coef_ = res.beta[1:]
        self.groups_ = gs
        self.selected_groups_ = res.selected
        self.n_iter_ = res.iterations
        self.converged_ = res.converged
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X, _ = check_xy(X, None, n_features=self.n_features_in_)
        return self.intercept_ + X @ self.coef_


class GroupLassoRegressor(RegressorMixin, _BaseGroupLasso):
    """Squared-error Group Lasso with an unpenalized intercept."""

    _family = GAUSSIAN

    def predict(self, X):
        return self.decision_function(X)


class LogisticGroupLasso(ClassifierMixin, _BaseGroupLasso):
    """Binary logistic regression with a Group Lasso penalty.

    Labels must be 0/1; ``predict_proba`` returns columns for class 0 and 1.
    """

    _family = BINOMIAL

    def _check_target(self, y):
        y = check_binary(y)
        self.classes_ = np.array([0, 1])
        return y

    def predict_proba(self, X):
        eta = self.decision_function(X)
        p1 = np.exp(-np.logaddexp(0.0, -eta))
        return np.column_stack([1 - p1, p1])

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(int)
