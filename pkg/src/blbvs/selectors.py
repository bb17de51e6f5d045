"""scikit-learn feature selectors backed by BLBVS and BootVS."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted

from .core import BINOMIAL, GROUP_LASSO, GroupedDataset
from .engine import BlbvsConfig, run_blbvs, run_bootvs
from .validation import check_binary, check_groups, check_xy


class _VoteSelector(SelectorMixin, BaseEstimator):
    def _config(self):
        return BlbvsConfig(
            gamma=self.gamma, s=self.n_subsets, r=self.n_resamples, cutoff=self.cutoff,
            penalty=self.penalty, seed=self.random_state, workers=self.n_jobs,
            tune=self.tune, lam=self.alpha, cv_folds=self.cv, standardize=self.standardize,
        )

    def _run(self, d, cfg):
        raise NotImplementedError

    def fit(self, X, y):
        X, y = check_xy(X, y)
        if self.family == BINOMIAL:
            y = check_binary(y)
        gs = check_groups(self.groups, X.shape[1])
        report = self._run(GroupedDataset(X, y, gs, self.family), self._config())
        mask = np.zeros(X.shape[1], dtype=bool)
        for cols, keep in zip(gs.groups, report.selected):
            mask[cols] = keep
        self.report_ = report
        self.groups_ = gs
        self.support_ = mask
        self.proportions_ = report.proportions
        self.selected_groups_ = report.selected
        self.xi_ = report.xi
        self.n_features_in_ = X.shape[1]
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "support_")
        return self.support_


class BLBVSSelector(_VoteSelector):
    """Keep the groups that a majority of bag-of-little-bootstraps fits select.

    ``groups`` is a list of column-index lists, a per-column label vector,
    or ``None`` for one group per column. ``alpha`` fixes lambda when
    ``tune="fixed"``.
    """

    def __init__(self, groups=None, family=BINOMIAL, penalty=GROUP_LASSO, gamma=0.7,
                 n_subsets=None, n_resamples=100, cutoff=0.5, tune="subset", alpha=None,
                 cv=10, standardize=True, random_state=0, n_jobs=1):
        self.groups = groups
        self.family = family
        self.penalty = penalty
        self.gamma = gamma
        self.n_subsets = n_subsets
        self.n_resamples = n_resamples
        self.cutoff = cutoff
        self.tune = tune
        self.alpha = alpha
        self.cv = cv
        self.standardize = standardize
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _run(self, d, cfg):
        return run_blbvs(d, cfg)


class BootVSSelector(_VoteSelector):
    """Same vote rule over ``n_resamples`` ordinary n-out-of-n bootstrap fits."""

    gamma = 0.7
    n_subsets = None

    def __init__(self, groups=None, family=BINOMIAL, penalty=GROUP_LASSO,
                 n_resamples=100, cutoff=0.5, tune="subset", alpha=None, cv=10,
                 standardize=True, random_state=0, n_jobs=1):
        self.groups = groups
        self.family = family
        self.penalty = penalty
        self.n_resamples = n_resamples
        self.cutoff = cutoff
        self.tune = tune
        self.alpha = alpha
        self.cv = cv
        self.standardize = standardize
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _run(self, d, cfg):
        return run_bootvs(d, self.n_resamples, cfg)
