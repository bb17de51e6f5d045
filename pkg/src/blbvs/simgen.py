"""Synthetic grouped data with a logistic (or Gaussian) response.

The default design has 35 independent standard normal predictors split into
eight contiguous groups of sizes 5, 4, 6, 5, 5, 3, 3, 4. Groups 1, 2, 4, 6 and 7
(1-based) carry coefficient 10 on every coordinate; the others get
coefficients drawn once from a standard normal. The linear predictor has no
intercept.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import BINOMIAL, FAMILIES, GAUSSIAN, GroupedDataset, GroupStructure
from .exceptions import GroupCountMismatch
from .resample import STREAM_SIM, RngSpec

TABLE2_SIZES = (5, 4, 6, 5, 5, 3, 3, 4)
TABLE2_TRUE = (1, 2, 4, 6, 7)


@dataclass(frozen=True)
class SimSpec:
    """Simulation settings. ``true_groups`` are 1-based group numbers.

    ``beta_style`` is ``"scalar"`` (every coordinate of a true group equals
    ``beta_true``) or ``"spread"`` (the group's Euclidean norm equals
    ``beta_true``, split evenly). ``noise_beta`` is ``"normal"`` (one
    standard-normal draw per coordinate of every other group) or ``"zero"``.
    """

    n: int = 20_000
    group_sizes: tuple = TABLE2_SIZES
    true_groups: tuple = TABLE2_TRUE
    beta_true: float = 10.0
    beta_style: str = "scalar"
    noise_beta: str = "normal"
    family: str = BINOMIAL
    sigma: float = 1.0
    seed: int = 0
    groups: GroupStructure = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        G = len(self.group_sizes)
        if not set(self.true_groups) <= set(range(1, G + 1)):
            raise ValueError(f"true groups must lie in 1..{G}")
        if self.beta_style not in ("scalar", "spread"):
            raise ValueError("beta_style must be 'scalar' or 'spread'")
        if self.noise_beta not in ("normal", "zero"):
            raise ValueError("noise_beta must be 'normal' or 'zero'")
        object.__setattr__(self, "groups", GroupStructure.from_sizes(self.group_sizes))

    @property
    def p(self) -> int:
        return int(sum(self.group_sizes))

    @property
    def true_mask(self) -> np.ndarray:
        mask = np.zeros(len(self.group_sizes), dtype=bool)
        mask[[g - 1 for g in self.true_groups]] = True
        return mask

    def tracked_coefficients(self) -> np.ndarray:
        """Positions in the (intercept-first) coefficient vector of true-group columns."""
        cols = [self.groups.groups[g - 1] for g in self.true_groups]
        return np.concatenate(cols) + 1 if cols else np.zeros(0, dtype=int)


def true_coefficients(spec: SimSpec) -> np.ndarray:
    """Intercept-first coefficient vector of the data-generating model."""
    rng = RngSpec(spec.seed).generator(STREAM_SIM, 0)
    beta = np.zeros(spec.p + 1)
    true = spec.true_mask
    for k, cols in enumerate(spec.groups.groups):
        if true[k]:
            if spec.beta_style == "scalar":
                beta[cols + 1] = spec.beta_true
            else:
                beta[cols + 1] = spec.beta_true / np.sqrt(len(cols))
        elif spec.noise_beta == "normal":
            beta[cols + 1] = rng.standard_normal(len(cols))
    return beta


def generate(spec: SimSpec, realization: int = 0):
    """Draw one dataset from the model. Returns ``(dataset, true_beta)``.

    The coefficient vector depends only on ``spec.seed``; ``realization``
    selects an independent draw of (X, y) from the same population.
    """
    beta = true_coefficients(spec)
    rng = RngSpec(spec.seed).generator(STREAM_SIM, 1, realization)
    x = rng.standard_normal((spec.n, spec.p))
    eta = beta[0] + x @ beta[1:]
    if spec.family == BINOMIAL:
        prob = np.exp(-np.logaddexp(0.0, -eta))
        y = (rng.random(spec.n) < prob).astype(float)
    else:
        y = eta + spec.sigma * rng.standard_normal(spec.n)
    return GroupedDataset(x, y, spec.groups, spec.family), beta


@dataclass(frozen=True)
class SelectionAccuracy:
    exact_match: bool
    true_positives: int
    false_positives: int
    false_negatives: int


def selection_accuracy(report, spec: SimSpec) -> SelectionAccuracy:
    """Compare a report's selected groups with the true groups of ``spec``."""
    selected = np.asarray(getattr(report, "selected", report), dtype=bool)
    truth = spec.true_mask
    if selected.shape != truth.shape:
        raise GroupCountMismatch(
            f"report has {selected.size} groups, spec has {truth.size}"
        )
    tp = int(np.sum(selected & truth))
    fp = int(np.sum(selected & ~truth))
    fn = int(np.sum(~selected & truth))
    return SelectionAccuracy(bool(fp == 0 and fn == 0), tp, fp, fn)


def intercept_only_spec(n: int = 10_000, sigma: float = 1.0, seed: int = 0) -> SimSpec:
    """Gaussian model with no predictors: y ~ Normal(0, sigma^2)."""
    return SimSpec(n=n, group_sizes=(), true_groups=(), family=GAUSSIAN,
                   sigma=sigma, seed=seed)
