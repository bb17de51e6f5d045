import itertools
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from blbvs.core import GAUSSIAN, GroupedDataset, GroupStructure
from blbvs.engine import (
    BlbvsConfig,
    aggregate_votes,
    aggregate_xi,
    resolve_s,
    run_blbvs,
    run_bootvs,
)
from blbvs.exceptions import GammaOutOfRange, LengthMismatch
from blbvs.simgen import generate, intercept_only_spec


def toy(seed=0, n=400):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, 6))
    y = 2 * x[:, 0] - 2 * x[:, 1] + 0.5 * rng.standard_normal(n)
    return GroupedDataset(x, y, GroupStructure.from_sizes([2, 2, 2]), GAUSSIAN)


def test_vote_examples():
    assert aggregate_votes(np.ones((2, 3, 2))).tolist() == [1.0, 1.0]
    assert aggregate_votes(np.zeros((2, 3, 1))).tolist() == [0.0]
    checker = np.array([[[1], [0]], [[0], [1]]])
    assert aggregate_votes(checker).tolist() == [0.5]


@given(arrays(bool, st.tuples(st.integers(1, 4), st.integers(1, 5), st.integers(1, 3))))
def test_votes_are_exact_fractions(ind):
    s, r, G = ind.shape
    got = aggregate_votes(ind)
    for g in range(G):
        assert got[g] == float(Fraction(int(ind[:, :, g].sum()), s * r))


def test_xi_aggregation():
    np.testing.assert_array_equal(aggregate_xi([[0.2], [0.4]]), [0.30000000000000004])
    np.testing.assert_array_equal(aggregate_xi([[1.0, 2.0]]), [1.0, 2.0])
    with pytest.raises(LengthMismatch):
        aggregate_xi([[1.0], [1.0, 2.0]])


@given(st.permutations(range(4)))
def test_xi_order_free(perm):
    vecs = [np.array([1.0, 2.0]) * k for k in (1, 2, 3, 4)]
    a = aggregate_xi(vecs)
    b = aggregate_xi([vecs[i] for i in perm])
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-15)


def test_config_validation():
    with pytest.raises(GammaOutOfRange):
        BlbvsConfig(gamma=1.5)
    with pytest.raises(ValueError):
        BlbvsConfig(tune="fixed")
    with pytest.raises(ValueError):
        BlbvsConfig(cutoff=1.0)
    assert "workers" not in BlbvsConfig().echo()


def test_default_s():
    assert resolve_s(10_000, BlbvsConfig(gamma=0.5)) == 100


def test_blbvs_selects_strong_groups():
    d = toy()
    rep = run_blbvs(d, BlbvsConfig(gamma=0.8, s=3, r=10, tune="subset", cv_folds=5))
    assert rep.selected[0]
    assert rep.proportions[0] == 1.0
    assert rep.n_fits == 30 and rep.votes.sum() == round(rep.proportions.sum() * 30)
    assert rep.xi.shape == (7,) and np.all(rep.xi >= 0)
    assert rep.xi_by_bag.shape == (3, 7)
    assert rep.intervals.shape == (7, 2)
    assert np.all(rep.intervals[:, 0] <= rep.intervals[:, 1])
    assert len(rep.trajectory) == 3
    assert [c.fits for c in rep.trajectory] == [10, 20, 30]
    assert rep.max_kkt_violation < 1e-4


def test_selection_rule_is_strict():
    d = toy()
    rep = run_blbvs(d, BlbvsConfig(gamma=0.8, s=2, r=5, tune="fixed", lam=0.01))
    np.testing.assert_array_equal(rep.selected, rep.proportions > 0.5)


def test_blbvs_and_bootvs_agree_on_toy():
    d = toy(n=300)
    cfg = BlbvsConfig(gamma=0.8, s=2, r=10, tune="fixed", lam=0.05)
    a = run_blbvs(d, cfg)
    b = run_bootvs(d, 30, cfg)
    np.testing.assert_array_equal(a.selected, b.selected)
    assert b.method == "bootvs" and b.n_fits == 30
    assert [c.fits for c in b.trajectory] == [10, 20, 30]


def test_single_resample_warns_and_sets_zero():
    d = toy(n=100)
    with pytest.warns(RuntimeWarning, match="fewer than two"):
        rep = run_bootvs(d, 1, BlbvsConfig(tune="fixed", lam=0.05))
    assert np.all(rep.xi == 0)


def test_reproducible_and_seed_sensitive():
    d = toy(n=200)
    cfg = BlbvsConfig(gamma=0.8, s=2, r=4, tune="fixed", lam=0.02, seed=4)
    a, b = run_blbvs(d, cfg), run_blbvs(d, cfg)
    np.testing.assert_array_equal(a.xi, b.xi)
    c = run_blbvs(d, BlbvsConfig(gamma=0.8, s=2, r=4, tune="fixed", lam=0.02, seed=5))
    assert not np.array_equal(a.xi, c.xi)


def test_workers_do_not_change_numbers():
    d = toy(n=200)
    kw = dict(gamma=0.7, s=3, r=4, tune="fixed", lam=0.02, seed=1)
    a = run_blbvs(d, BlbvsConfig(workers=1, **kw))
    b = run_blbvs(d, BlbvsConfig(workers=2, **kw))
    assert a.to_dict() == b.to_dict()


def test_bootvs_intercept_only_standard_error():
    d, _ = generate(intercept_only_spec(n=2000, seed=1))
    rep = run_bootvs(d, 200, BlbvsConfig(tune="fixed", lam=0.0, seed=2))
    assert rep.xi[0] == pytest.approx(d.y.std() / np.sqrt(2000), rel=0.12)
    assert rep.xi_mean == rep.xi[0]


def test_blbvs_intercept_only_standard_error():
    d, _ = generate(intercept_only_spec(n=4000, seed=1))
    rep = run_blbvs(d, BlbvsConfig(gamma=0.7, s=4, r=50, tune="fixed", lam=0.0))
    assert rep.xi[0] == pytest.approx(1 / np.sqrt(4000), rel=0.12)


def test_per_resample_tuning_runs():
    d = toy(n=200)
    rep = run_blbvs(d, BlbvsConfig(gamma=0.8, s=1, r=3, cv_folds=3, n_lambda=10))
    assert len(np.unique(rep.lambdas)) >= 1 and rep.n_fits == 3


def test_exhaustive_single_group_patterns():
    for s, r in itertools.product(range(1, 3), range(1, 4)):
        pats = np.array(list(itertools.product([0, 1], repeat=s * r)), dtype=bool)
        ind = pats.T.reshape(s, r, -1)
        np.testing.assert_array_equal(aggregate_votes(ind), pats.sum(axis=1) / (s * r))


def test_report_dict_has_no_timings():
    d = toy(n=200)
    rep = run_blbvs(d, BlbvsConfig(gamma=0.8, s=2, r=3, tune="fixed", lam=0.02))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        out = rep.to_dict()
    assert "seconds" not in str(out.keys()) and "fit_seconds" not in out
    assert all(set(t) == {"fits", "xi_mean"} for t in out["trajectory"])
