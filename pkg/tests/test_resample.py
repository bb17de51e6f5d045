import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blbvs.exceptions import GammaOutOfRange, NotEnoughRows
from blbvs.resample import (
    RngSpec,
    SubsetSample,
    bootstrap_sample,
    compress_indices,
    draw_subsets,
    draw_weights,
    expected_distinct_fraction,
    subset_size,
)


@pytest.mark.parametrize("n,gamma,b", [
    (10_000, 0.5, 100), (20_000, 0.7, 1024), (20_000, 0.6, 380),
    (100, 0.5, 10), (1_000_000, 0.5, 1000), (2, 0.5, 1),
])
def test_subset_size(n, gamma, b):
    assert subset_size(n, gamma) == b


@pytest.mark.parametrize("gamma", [0.0, 1.0, 1.5, -0.1])
def test_gamma_out_of_range(gamma):
    with pytest.raises(GammaOutOfRange):
        subset_size(100, gamma)


def test_disjoint_subsets():
    subs = draw_subsets(1000, 5, 0.7, RngSpec(3))
    allrows = np.concatenate([s.indices for s in subs])
    assert len(np.unique(allrows)) == len(allrows) == 5 * subset_size(1000, 0.7)
    with pytest.raises(NotEnoughRows):
        draw_subsets(100, 20, 0.7, RngSpec(0))


def test_overlapping_subsets_are_keyed_per_subset():
    a = draw_subsets(500, 3, 0.6, RngSpec(1), disjoint=False)
    b = draw_subsets(500, 5, 0.6, RngSpec(1), disjoint=False)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.indices, y.indices)


@given(st.integers(2, 3000), st.floats(0.3, 0.9), st.integers(0, 10**6))
def test_weights_sum_to_n(n, gamma, seed):
    sub = SubsetSample(np.arange(subset_size(n, gamma)), n, gamma)
    w = draw_weights(sub, RngSpec(seed).generator(1, 0, 0))
    assert w.weights.sum() == n
    assert np.all(w.weights >= 0)
    assert len(w.expand()) == n


def test_weights_are_reproducible():
    sub = SubsetSample(np.arange(50), 1000)
    a = draw_weights(sub, RngSpec(9).generator(1, 2, 3)).weights
    b = draw_weights(sub, RngSpec(9).generator(1, 2, 3)).weights
    c = draw_weights(sub, RngSpec(9).generator(1, 2, 4)).weights
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_multinomial_weights_have_expected_moments():
    sub = SubsetSample(np.arange(20), 2000)
    g = RngSpec(0).generator(1)
    w = np.stack([draw_weights(sub, g).weights for _ in range(2000)])
    assert abs(w.mean() - 100) < 0.5
    # Multinomial(n, 1/b) variance per cell: n (1/b)(1 - 1/b)
    assert abs(w.var(axis=0).mean() / (2000 * 0.05 * 0.95) - 1) < 0.05


@given(st.lists(st.integers(0, 9), min_size=1, max_size=40))
def test_compress_roundtrip(idx):
    w = compress_indices(idx, 10)
    assert sorted(w.expand().tolist()) == sorted(idx)


def test_bootstrap_distinct_share():
    n = 100_000
    w = bootstrap_sample(n, RngSpec(0).generator(3, 0))
    assert w.weights.sum() == n
    assert abs(len(w.indices) / n - expected_distinct_fraction(n)) < 0.005
    assert abs(expected_distinct_fraction(n) - 0.632) < 0.001
