"""Regularization paths and weighted K-fold cross-validation for lambda."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    BINOMIAL,
    GAUSSIAN,
    LASSO,
    GroupedDataset,
    GroupStructure,
    PenaltyConfig,
)
from .exceptions import FoldTooSmall
from .group_lasso import BcdSettings, BlockProblem
from .lasso import CcdSettings, LassoProblem, weighted_arrays

CV_RULES = ("min", "1se")
CV_LOSSES = ("default", "deviance", "squared", "misclass")


def make_solver(x, y, weights, groups: GroupStructure, penalty: PenaltyConfig,
                family: str, settings=None):
    """Return a prepared problem with ``solve``, ``lambda_max`` and ``kkt``.

    A Lasso penalty on a binomial response is solved as a Group Lasso with
    singleton groups and unit rescaling, which is the same objective.
    """
    if penalty.kind == LASSO and family == GAUSSIAN:
        if settings is not None and not isinstance(settings, CcdSettings):
            settings = None
        return LassoProblem(x, y, weights, groups, settings)
    if settings is not None and not isinstance(settings, BcdSettings):
        settings = None
    if penalty.kind == LASSO:
        p = x.shape[1]
        return BlockProblem(x, y, weights, GroupStructure.singletons(p),
                            np.ones(p), family, settings, report_groups=groups)
    return BlockProblem(x, y, weights, groups, penalty.group_weights(groups),
                        family, settings)


def prepare(d: GroupedDataset, w, penalty: PenaltyConfig, settings=None):
    x, y, weights = weighted_arrays(d, w)
    return make_solver(x, y, weights, d.groups, penalty, d.family, settings)


@dataclass(frozen=True)
class LambdaPath:
    lambda_max: float
    grid: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1 or len(g) == 0:
            raise ValueError("grid must be a non-empty vector")
        if np.any(g <= 0) or np.any(np.diff(g) >= 0):
            raise ValueError("grid must be positive and strictly descending")
        object.__setattr__(self, "grid", g)

    @classmethod
    def from_max(cls, lam_max: float, n_lambda: int = 50, ratio: float = 1e-3):
        top = lam_max if lam_max > 0 else 1e-10
        return cls(lam_max, top * np.logspace(0.0, np.log10(ratio), n_lambda))


def lambda_max(d: GroupedDataset, w, penalty: PenaltyConfig) -> float:
    """Smallest lambda at which every penalized coefficient is zero."""
    return prepare(d, w, penalty).lambda_max()


def fit_path(solver, grid, beta_init=None):
    """Warm-started fits along a descending grid."""
    fits = []
    beta = beta_init
    for lam in grid:
        res = solver.solve(lam, beta)
        fits.append(res)
        beta = res.beta
    return fits


def pointwise_loss(family, y, eta, kind="default"):
    """Per-row validation loss."""
    if kind == "default":
        kind = "deviance" if family == BINOMIAL else "squared"
    if kind == "squared":
        return (y - eta) ** 2
    if kind == "deviance":
        return 2.0 * (np.logaddexp(0.0, eta) - y * eta)
    if kind == "misclass":
        return ((eta > 0).astype(float) != y).astype(float)
    raise ValueError(f"unknown loss {kind!r}")


@dataclass
class CvResult:
    grid: np.ndarray
    per_lambda_error: np.ndarray
    per_lambda_se: np.ndarray
    chosen_lambda: float
    rule: str = "min"

    @property
    def chosen_index(self) -> int:
        return int(np.flatnonzero(self.grid == self.chosen_lambda)[0])


def fold_assignment(b: int, K: int, rng: np.random.Generator) -> np.ndarray:
    """Fold label for each of the b distinct rows, as balanced as possible."""
    if K < 2:
        raise ValueError("K must be at least 2")
    if b < K:
        raise FoldTooSmall(f"{b} rows cannot fill {K} folds")
    labels = np.arange(b) % K
    return labels[rng.permutation(b)]


def cross_validate(
    d: GroupedDataset,
    w,
    penalty: PenaltyConfig,
    path: LambdaPath | None = None,
    K: int = 10,
    rng: np.random.Generator | None = None,
    rule: str = "min",
    loss: str = "default",
    settings=None,
    n_lambda: int = 50,
    ratio: float = 1e-3,
) -> CvResult:
    """K-fold cross-validation over the distinct rows of a weighted sample.

    Each row keeps its resample weight in whichever fold it lands. Without an
    explicit ``path`` the grid starts at the largest ``lambda_max`` of the
    full sample and every training fold, so its first point is the null model
    everywhere.
    """
    x, y, weights = weighted_arrays(d, w)
    return cross_validate_arrays(x, y, weights, d.groups, penalty, d.family,
                                 path, K, rng, rule, loss, settings, n_lambda, ratio)


def cross_validate_arrays(x, y, weights, groups, penalty, family, path=None,
                          K=10, rng=None, rule="min", loss="default",
                          settings=None, n_lambda=50, ratio=1e-3) -> CvResult:
    """Array-level core of :func:`cross_validate`."""
    if rule not in CV_RULES:
        raise ValueError(f"rule must be one of {CV_RULES}")
    b = x.shape[0]
    rng = rng if rng is not None else np.random.default_rng(0)
    folds = fold_assignment(b, K, rng)
    solvers = []
    for k in range(K):
        tr = folds != k
        if weights[tr].sum() <= 0:
            raise FoldTooSmall(f"training fold {k} carries no weight")
        solvers.append(make_solver(x[tr], y[tr], weights[tr], groups, penalty,
                                   family, settings))
    if path is None:
        full = make_solver(x, y, weights, groups, penalty, family, settings)
        top = max([full.lambda_max()] + [s.lambda_max() for s in solvers])
        path = LambdaPath.from_max(top, n_lambda, ratio)
    L = len(path.grid)
    fold_err = np.zeros((K, L))
    fold_w = np.zeros(K)
    for k, solver in enumerate(solvers):
        va = folds == k
        xv, yv, wv = x[va], y[va], weights[va]
        fold_w[k] = wv.sum()
        for l, res in enumerate(fit_path(solver, path.grid)):
            eta = res.beta[0] + xv @ res.beta[1:]
            fold_err[k, l] = np.dot(wv, pointwise_loss(family, yv, eta, loss))
    total_w = fold_w.sum()
    err = fold_err.sum(axis=0) / total_w
    # spread of per-fold mean losses, for the one-standard-error rule
    per_fold = fold_err / np.where(fold_w > 0, fold_w, 1.0)[:, None]
    se = np.sqrt(
        np.average((per_fold - err) ** 2, axis=0, weights=np.maximum(fold_w, 1e-300))
        / max(K - 1, 1)
    )
    best = int(np.argmin(err))
    if rule == "min":
        chosen = best
    else:
        # grid descends, so the first index within one SE is the largest lambda
        chosen = int(np.flatnonzero(err <= err[best] + se[best])[0])
    return CvResult(path.grid, err, se, float(path.grid[chosen]), rule)
