"""Subset sampling, multinomial resample weights and bootstrap indices.

Every random draw comes from a :class:`numpy.random.Generator` derived from
``RngSpec(master_seed)`` by a fixed key, so the samples do not depend on
which worker draws them or in what order.
"""

from __future__ import annotations

import decimal
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import GammaOutOfRange, NotEnoughRows

# first element of every spawn key; keeps unrelated draws on separate streams
STREAM_SUBSETS = 0
STREAM_WEIGHTS = 1
STREAM_CV = 2
STREAM_BOOT = 3
STREAM_SIM = 4


@dataclass(frozen=True)
class RngSpec:
    """Master seed plus the rule mapping a key like ``(i, j)`` to a child stream."""

    master_seed: int = 0

    def seed_sequence(self, *key: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(
            int(self.master_seed), spawn_key=tuple(int(k) for k in key)
        )

    def generator(self, *key: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence(*key)))


@dataclass(frozen=True)
class SubsetSample:
    indices: np.ndarray
    parent_n: int
    gamma: float | None = None

    @property
    def b(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class WeightedSample:
    """Distinct row indices with integer multiplicities summing to ``parent_n``."""

    subset: SubsetSample
    weights: np.ndarray

    @property
    def indices(self) -> np.ndarray:
        return self.subset.indices

    @property
    def parent_n(self) -> int:
        return self.subset.parent_n

    @classmethod
    def full(cls, n: int) -> "WeightedSample":
        """Every row once; the plain unweighted problem."""
        return cls(SubsetSample(np.arange(n), n), np.ones(n, dtype=np.int64))

    def expand(self) -> np.ndarray:
        """Row indices with each distinct row repeated by its weight."""
        return np.repeat(self.indices, self.weights)


def subset_size(n: int, gamma: float) -> int:
    """``floor(n ** gamma)``, evaluated in 60-digit decimal arithmetic."""
    if not 0 < gamma < 1:
        raise GammaOutOfRange(f"gamma must lie in (0, 1), got {gamma}")
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return 1
    with decimal.localcontext() as ctx:
        ctx.prec = 60
        value = (decimal.Decimal(int(n)).ln() * decimal.Decimal(gamma)).exp()
        nearest = value.to_integral_value(rounding=decimal.ROUND_HALF_EVEN)
        # exact powers such as 10000 ** 0.5 land within rounding noise
        if abs(value - nearest) < decimal.Decimal("1e-40"):
            b = int(nearest)
        else:
            b = int(value.to_integral_value(rounding=decimal.ROUND_FLOOR))
    return max(1, min(b, int(n)))


def draw_subsets(
    n: int,
    s: int,
    gamma: float,
    rng: RngSpec,
    disjoint: bool = True,
) -> list[SubsetSample]:
    """Draw ``s`` subsets of ``b = floor(n ** gamma)`` distinct rows each.

    In disjoint mode the subsets are also mutually exclusive, which requires
    ``s * b <= n``.
    """
    if s < 1:
        raise ValueError("s must be at least 1")
    b = subset_size(n, gamma)
    if disjoint:
        if s * b > n:
            raise NotEnoughRows(
                f"{s} disjoint subsets of size {b} need {s * b} rows, have {n}"
            )
        g = rng.generator(STREAM_SUBSETS)
        picked = g.choice(n, size=s * b, replace=False)
        return [
            SubsetSample(np.sort(picked[i * b:(i + 1) * b]), n, gamma)
            for i in range(s)
        ]
    out = []
    for i in range(s):
        g = rng.generator(STREAM_SUBSETS, i)
        out.append(SubsetSample(np.sort(g.choice(n, size=b, replace=False)), n, gamma))
    return out


def draw_weights(subset: SubsetSample, rng: np.random.Generator) -> WeightedSample:
    """Multinomial(n, uniform over the b subset rows) resample weights."""
    b = subset.b
    # numpy draws multinomials by sequential conditional binomials: O(b)
    w = rng.multinomial(subset.parent_n, np.full(b, 1.0 / b))
    return WeightedSample(subset, w.astype(np.int64))


def draw_bootstrap_indices(n: int, rng: np.random.Generator) -> np.ndarray:
    """n row indices drawn uniformly with replacement."""
    if n < 1:
        raise ValueError("n must be positive")
    return rng.integers(0, n, size=n)


def compress_indices(idx, n: int) -> WeightedSample:
    """Collapse a multiset of row indices into distinct rows plus counts."""
    rows, counts = np.unique(np.asarray(idx), return_counts=True)
    return WeightedSample(SubsetSample(rows, n), counts.astype(np.int64))


def bootstrap_sample(n: int, rng: np.random.Generator) -> WeightedSample:
    """Conventional n-out-of-n bootstrap resample in compressed form."""
    return compress_indices(draw_bootstrap_indices(n, rng), n)


def expected_distinct_fraction(n: int) -> float:
    """Expected share of distinct rows in an n-out-of-n resample."""
    return 1.0 - math.exp(n * math.log1p(-1.0 / n)) if n > 1 else 1.0
