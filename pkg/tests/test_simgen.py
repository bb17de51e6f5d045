import numpy as np
import pytest

from blbvs.core import GAUSSIAN
from blbvs.exceptions import GroupCountMismatch
from blbvs.simgen import (
    SimSpec,
    generate,
    intercept_only_spec,
    selection_accuracy,
    true_coefficients,
)


def test_default_design():
    spec = SimSpec(n=500)
    d, beta = generate(spec)
    assert d.p == 35 and d.groups.n_groups == 8
    assert d.groups.df.tolist() == [5, 4, 6, 5, 5, 3, 3, 4]
    assert beta[0] == 0
    for k, cols in enumerate(d.groups.groups):
        if k + 1 in (1, 2, 4, 6, 7):
            assert np.all(beta[cols + 1] == 10)
    assert len(spec.tracked_coefficients()) == 5 + 4 + 5 + 3 + 3


def test_spread_style_has_norm_ten():
    beta = true_coefficients(SimSpec(n=10, beta_style="spread"))
    g = SimSpec(n=10).groups.groups[0]
    assert np.linalg.norm(beta[g + 1]) == pytest.approx(10)


def test_deterministic_and_realizations_differ():
    a, _ = generate(SimSpec(n=100, seed=3))
    b, _ = generate(SimSpec(n=100, seed=3))
    c, bc = generate(SimSpec(n=100, seed=3), realization=1)
    np.testing.assert_array_equal(a.x, b.x)
    assert not np.array_equal(a.x, c.x)
    np.testing.assert_array_equal(bc, true_coefficients(SimSpec(n=100, seed=3)))


def test_null_model_is_fair_coin():
    spec = SimSpec(n=20_000, true_groups=(), noise_beta="zero")
    d, _ = generate(spec)
    assert abs(d.y.mean() - 0.5) < 3 * 0.5 / np.sqrt(d.n)


def test_predictor_moments():
    d, _ = generate(SimSpec(n=20_000))
    tol = 4 / np.sqrt(d.n)
    assert np.max(np.abs(d.x.mean(axis=0))) < tol
    assert np.max(np.abs(d.x.var(axis=0) - 1)) < 4 * np.sqrt(2 / d.n)


def test_logistic_calibration():
    d, beta = generate(SimSpec(n=20_000, beta_true=0.3))
    eta = d.x @ beta[1:]
    p = 1 / (1 + np.exp(-eta))
    bins = np.quantile(p, np.linspace(0, 1, 11))
    lab = np.clip(np.searchsorted(bins, p, side="right") - 1, 0, 9)
    for k in range(10):
        m = lab == k
        assert abs(d.y[m].mean() - p[m].mean()) < 0.05


def test_selection_accuracy():
    spec = SimSpec(n=10)
    acc = selection_accuracy(spec.true_mask, spec)
    assert acc.exact_match and acc.true_positives == 5
    none = selection_accuracy(np.zeros(8, bool), spec)
    assert none.true_positives == 0 and not none.exact_match
    everything = selection_accuracy(np.ones(8, bool), spec)
    assert everything.false_positives == 3
    with pytest.raises(GroupCountMismatch):
        selection_accuracy(np.ones(7, bool), spec)


def test_invalid_specs():
    with pytest.raises(ValueError):
        SimSpec(true_groups=(9,))
    with pytest.raises(ValueError):
        SimSpec(n=0)


def test_intercept_only():
    d, beta = generate(intercept_only_spec(n=50))
    assert d.p == 0 and d.family == GAUSSIAN and beta.tolist() == [0.0]
