import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.linear_model import LogisticRegression

from blbvs.core import (
    BINOMIAL,
    GAUSSIAN,
    GROUP_LASSO,
    LASSO,
    GroupedDataset,
    GroupStructure,
    PenaltyConfig,
)
from blbvs.group_lasso import (
    BlockProblem,
    GroupLassoRegressor,
    LogisticGroupLasso,
    fit_grouplasso_logistic,
    group_lasso_gaussian,
    kkt_check_grouplasso,
    make_problem as block_problem,
)
from blbvs.lasso import fit_lasso_weighted
from blbvs.resample import RngSpec, SubsetSample, draw_weights

from .conftest import make_problem
from .oracles import fista_group_lasso


@pytest.mark.parametrize("family", [GAUSSIAN, BINOMIAL])
@pytest.mark.parametrize("frac", [0.05, 0.3])
def test_matches_proximal_gradient_oracle(family, frac):
    d = make_problem(3, n=150, sizes=(2, 3, 1, 2), family=family)
    pen = PenaltyConfig(GROUP_LASSO)
    prob = block_problem(d, None, pen)
    lam = frac * prob.lambda_max()
    res = prob.solve(lam)
    ref = fista_group_lasso(d.x, d.y, np.ones(d.n), d.groups.groups,
                            pen.group_weights(d.groups), lam, family == BINOMIAL)
    np.testing.assert_allclose(res.beta, ref, atol=1e-5)
    assert res.objective <= prob.objective(ref, lam) + 1e-10


def test_unpenalized_logistic_matches_sklearn():
    d = make_problem(5, n=400, sizes=(2, 2), family=BINOMIAL, signal=0.5)
    res = fit_grouplasso_logistic(d, None, PenaltyConfig(GROUP_LASSO, 0.0))
    sk = LogisticRegression(penalty=None, tol=1e-12, max_iter=10_000).fit(d.x, d.y)
    np.testing.assert_allclose(res.beta[1:], sk.coef_[0], atol=1e-5)
    assert res.beta[0] == pytest.approx(sk.intercept_[0], abs=1e-5)


def test_singleton_groups_reduce_to_lasso():
    d = make_problem(2, n=100, sizes=(1,) * 5)
    lam = 0.08
    g = group_lasso_gaussian(d, None, PenaltyConfig(GROUP_LASSO, lam, rescale="one"))
    las = fit_lasso_weighted(d, None, PenaltyConfig(LASSO, lam))
    np.testing.assert_allclose(g.beta, las.beta, atol=1e-6)


def test_group_selected_or_dropped_together():
    d = make_problem(4, n=200, sizes=(3, 3, 2), family=BINOMIAL)
    prob = block_problem(d, None, PenaltyConfig(GROUP_LASSO))
    for frac in np.linspace(0.05, 1.0, 8):
        beta = prob.solve(frac * prob.lambda_max()).beta[1:]
        for g in d.groups.groups:
            nz = beta[g] != 0
            assert nz.all() or not nz.any()


def test_lambda_max_is_null_boundary(binomial_data):
    prob = block_problem(binomial_data, None, PenaltyConfig(GROUP_LASSO))
    lm = prob.lambda_max()
    assert not prob.solve(lm * 1.0001).selected.any()
    assert prob.solve(lm * 0.98).selected.any()


def test_noncontiguous_groups_returned_in_caller_order():
    d = make_problem(6, n=120, sizes=(2, 2, 1))
    perm = [4, 0, 2, 1, 3]
    gs = GroupStructure([[perm.index(j) for j in g] for g in d.groups.groups])
    dp = GroupedDataset(d.x[:, perm], d.y, gs)
    pen = PenaltyConfig(GROUP_LASSO, 0.05)
    a = group_lasso_gaussian(d, None, pen).beta
    b = group_lasso_gaussian(dp, None, pen).beta
    np.testing.assert_allclose(b[1:], a[1:][perm], atol=1e-7)


def test_separation_is_flagged():
    x = np.array([[-2.0], [-1.0], [1.0], [2.0]])
    d = GroupedDataset(x, [0, 0, 1, 1], GroupStructure.singletons(1), BINOMIAL)
    res = fit_grouplasso_logistic(d, None, PenaltyConfig(GROUP_LASSO, 0.0))
    assert res.separated and not res.converged


@given(st.integers(0, 10**6), st.floats(0.02, 1.1), st.sampled_from([GAUSSIAN, BINOMIAL]))
def test_kkt_and_expansion(seed, frac, family):
    d = make_problem(seed % 300, n=60, sizes=(2, 1, 3), family=family)
    ws = draw_weights(SubsetSample(np.arange(0, 60, 2), 60), RngSpec(seed).generator(1))
    pen = PenaltyConfig(GROUP_LASSO)
    prob = block_problem(d, ws, pen)
    lam = frac * prob.lambda_max()
    res = prob.solve(lam)
    if res.converged:
        assert kkt_check_grouplasso(d, ws, pen.with_lambda(lam), res.beta) < 1e-4
        ex = d.take(ws.expand())
        other = block_problem(ex, None, pen).solve(lam)
        np.testing.assert_allclose(res.beta, other.beta, atol=1e-5)


def test_estimators(binomial_data, gaussian_data):
    clf = LogisticGroupLasso(groups=[[0, 1], [2, 3, 4], [5]], alpha=0.01)
    clf.fit(binomial_data.x, binomial_data.y)
    proba = clf.predict_proba(binomial_data.x)
    np.testing.assert_allclose(proba.sum(axis=1), 1.0)
    assert set(np.unique(clf.predict(binomial_data.x))) <= {0, 1}
    assert clf.score(binomial_data.x, binomial_data.y) > 0.6
    with pytest.raises(ValueError):
        clf.fit(gaussian_data.x, gaussian_data.y)
    reg = GroupLassoRegressor(groups=[0, 0, 1, 1, 1, 2], alpha=0.01)
    reg.fit(gaussian_data.x, gaussian_data.y)
    assert reg.selected_groups_.shape == (3,)
    assert reg.get_params()["alpha"] == 0.01


def test_block_problem_gradient_zero_at_optimum():
    d = make_problem(8, n=90, sizes=(2, 2))
    prob = BlockProblem(d.x, d.y, np.ones(90), d.groups, np.ones(2), GAUSSIAN)
    res = prob.solve(0.0)
    np.testing.assert_allclose(prob.gradient(res.beta), 0.0, atol=1e-6)
