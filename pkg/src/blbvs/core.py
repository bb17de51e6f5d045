"""Domain types shared across the package: grouped datasets, penalties, fits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exceptions import (
    BadResponse,
    DimensionMismatch,
    EmptyGroup,
    OverlappingGroups,
)

GAUSSIAN = "gaussian"
BINOMIAL = "binomial"
FAMILIES = (GAUSSIAN, BINOMIAL)

LASSO = "lasso"
GROUP_LASSO = "group_lasso"
PENALTIES = (LASSO, GROUP_LASSO)


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GroupStructure:
    """Partition of the ``p`` predictor columns into ``G`` ordered groups.

    Indices are zero-based column positions in the design matrix; the
    intercept is not part of any group.
    """

    groups: tuple
    names: tuple

    def __init__(self, groups: Sequence[Sequence[int]], names: Sequence[str] | None = None):
        object.__setattr__(
            self, "groups", tuple(_frozen(sorted(g), dtype=np.intp) for g in groups)
        )
        if names is None:
            names = [str(k + 1) for k in range(len(self.groups))]
        if len(names) != len(self.groups):
            raise ValueError("one name per group is required")
        object.__setattr__(self, "names", tuple(str(v) for v in names))

    @classmethod
    def from_sizes(cls, sizes: Sequence[int], names=None) -> "GroupStructure":
        """Contiguous groups, e.g. ``from_sizes([2, 3])`` -> ``[[0, 1], [2, 3, 4]]``."""
        bounds = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        return cls([range(a, b) for a, b in zip(bounds[:-1], bounds[1:])], names)

    @classmethod
    def singletons(cls, p: int) -> "GroupStructure":
        return cls([[j] for j in range(p)])

    @classmethod
    def from_labels(cls, labels: Sequence) -> "GroupStructure":
        """Build groups from a per-column label vector, ordered by first appearance."""
        order: dict = {}
        for j, lab in enumerate(labels):
            order.setdefault(lab, []).append(j)
        return cls(list(order.values()), [str(k) for k in order])

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def df(self) -> np.ndarray:
        return np.array([len(g) for g in self.groups], dtype=int)

    @property
    def n_features(self) -> int:
        return int(sum(len(g) for g in self.groups))

    def column_labels(self) -> np.ndarray:
        """Group index of every column."""
        lab = np.empty(self.n_features, dtype=int)
        for k, g in enumerate(self.groups):
            lab[g] = k
        return lab

    def check(self, p: int | None = None) -> None:
        """Raise if the groups are not a partition of ``range(p)``."""
        if p is None:
            p = self.n_features
        seen = np.zeros(p, dtype=bool)
        for k, g in enumerate(self.groups):
            if len(g) == 0:
                raise EmptyGroup(f"group {k} is empty")
            if g.min() < 0 or g.max() >= p:
                raise DimensionMismatch(
                    f"group {k} references a column outside 0..{p - 1}"
                )
            if len(np.unique(g)) != len(g) or seen[g].any():
                raise OverlappingGroups(f"group {k} overlaps another group")
            seen[g] = True
        if not seen.all():
            missing = np.flatnonzero(~seen)
            raise DimensionMismatch(
                f"columns {missing.tolist()} are not assigned to any group"
            )
        if p >= 1 and len(self.groups) == 0:
            raise EmptyGroup("at least one group is required")


@dataclass(frozen=True, eq=False)
class GroupedDataset:
    """Design matrix, response and group structure.

    ``x`` does not contain an intercept column. ``standardized`` records
    whether the columns were centred and scaled by :func:`standardize_columns`;
    ``constant`` flags columns that had zero variance at that time.
    """

    x: np.ndarray
    y: np.ndarray
    groups: GroupStructure
    family: str = GAUSSIAN
    standardized: bool = False
    constant: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen(np.atleast_2d(self.x)))
        object.__setattr__(self, "y", _frozen(np.ravel(self.y)))
        if self.constant is not None:
            object.__setattr__(self, "constant", _frozen(self.constant, dtype=bool))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def take(self, rows) -> "GroupedDataset":
        """Row subset, keeping groups and family."""
        return GroupedDataset(
            self.x[rows], self.y[rows], self.groups, self.family,
            self.standardized, self.constant,
        )


def validate_dataset(d: GroupedDataset) -> None:
    """Raise the first violated dataset invariant, return ``None`` otherwise."""
    if d.family not in FAMILIES:
        raise ValueError(f"unknown family {d.family!r}")
    if d.x.ndim != 2:
        raise DimensionMismatch("x must be two-dimensional")
    if d.y.shape[0] != d.x.shape[0]:
        raise DimensionMismatch(
            f"y has {d.y.shape[0]} entries but x has {d.x.shape[0]} rows"
        )
    if d.n < 2:
        raise DimensionMismatch("at least two rows are required")
    if d.groups.n_features != d.p:
        raise DimensionMismatch(
            f"groups cover {d.groups.n_features} columns, x has {d.p}"
        )
    d.groups.check(d.p)
    if not (np.all(np.isfinite(d.x)) and np.all(np.isfinite(d.y))):
        raise BadResponse("x and y must be finite")
    if d.family == BINOMIAL and not np.all((d.y == 0) | (d.y == 1)):
        bad = d.y[(d.y != 0) & (d.y != 1)][0]
        raise BadResponse(f"binomial response must be 0 or 1, found {bad!r}")


def standardize_columns(d: GroupedDataset):
    """Centre every column and scale it to unit population standard deviation.

    Returns ``(standardized_dataset, centers, scales)``. Constant columns are
    centred, keep scale 1 and are flagged in ``standardized_dataset.constant``.
    """
    centers = d.x.mean(axis=0)
    xc = d.x - centers
    sd = np.sqrt(np.mean(xc**2, axis=0))
    constant = sd <= 1e-12 * np.maximum(1.0, np.abs(centers))
    scales = np.where(constant, 1.0, sd)
    xs = xc / scales
    xs[:, constant] = 0.0
    out = GroupedDataset(xs, d.y, d.groups, d.family, True, constant)
    return out, centers, scales


def back_transform(beta, centers, scales) -> np.ndarray:
    """Map coefficients fitted on standardized columns to the original scale."""
    beta = np.asarray(beta, dtype=float)
    out = np.empty_like(beta)
    out[1:] = beta[1:] / scales
    out[0] = beta[0] - np.dot(centers, out[1:])
    return out


def _sqrt_df(df):
    return np.sqrt(np.asarray(df, dtype=float))


def _unit(df):
    return np.ones(len(df), dtype=float)


RESCALE = {"sqrt": _sqrt_df, "one": _unit}


@dataclass(frozen=True)
class PenaltyConfig:
    """Penalty kind, strength and the per-group rescaling ``s(df_g)``.

    ``rescale`` is either a key of :data:`RESCALE` or a callable mapping the
    vector of group sizes to per-group weights.
    """

    kind: str = LASSO
    lam: float = 0.0
    rescale: str | Callable = "sqrt"
    penalize_intercept: bool = False

    def __post_init__(self):
        if self.kind not in PENALTIES:
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if not self.lam >= 0:
            raise ValueError("lambda must be nonnegative")
        if self.penalize_intercept:
            raise ValueError("the intercept is never penalized")

    def group_weights(self, groups: GroupStructure) -> np.ndarray:
        f = RESCALE[self.rescale] if isinstance(self.rescale, str) else self.rescale
        return np.asarray(f(groups.df), dtype=float)

    def with_lambda(self, lam: float) -> "PenaltyConfig":
        return PenaltyConfig(self.kind, float(lam), self.rescale)


@dataclass
class FitResult:
    """Outcome of one penalized fit; ``beta[0]`` is the intercept."""

    beta: np.ndarray
    selected: np.ndarray
    objective: float
    iterations: int
    converged: bool
    separated: bool = False
    lam: float = float("nan")
    extra: dict = field(default_factory=dict)


def selected_groups(beta, groups: GroupStructure) -> np.ndarray:
    """Boolean vector, true where a group has any nonzero coefficient."""
    coef = np.asarray(beta)[1:]
    return np.array([bool(np.any(coef[g] != 0)) for g in groups.groups], dtype=bool)
