"""Monte Carlo ground truth for standard errors and the relative-deviation metric.

The truth is the spread of a fit procedure's estimates across independent
datasets drawn from the simulation model. An estimate of that spread (from
BLBVS or BootVS) is scored by comparing the sums of variances over a tracked
set of coefficients.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np
from joblib import Parallel, delayed

from .core import PenaltyConfig, back_transform, standardize_columns
from .exceptions import ZeroTruthTrace
from .simgen import SimSpec, generate
from .tuning import cross_validate_arrays, make_solver

THRESHOLDS = (1.0, 0.5, 0.2)


@dataclass(frozen=True)
class GroundTruth:
    """Per-coefficient variance across realizations and its tracked trace."""

    v: np.ndarray
    T: float
    realizations: int
    tracked: np.ndarray
    mean: np.ndarray | None = None


@dataclass(frozen=True)
class Trajectory:
    """RD (or any nonnegative metric) against cumulative processing seconds."""

    seconds: np.ndarray
    rd: np.ndarray

    def __post_init__(self):
        sec = np.asarray(self.seconds, dtype=float)
        rd = np.asarray(self.rd, dtype=float)
        if sec.shape != rd.shape or sec.ndim != 1 or sec.size == 0:
            raise ValueError("seconds and rd must be non-empty vectors of equal length")
        if np.any(np.diff(sec) <= 0):
            raise ValueError("seconds must be strictly increasing")
        if np.any(rd < 0):
            raise ValueError("rd must be nonnegative")
        object.__setattr__(self, "seconds", sec)
        object.__setattr__(self, "rd", rd)

    @property
    def points(self):
        return list(zip(self.seconds.tolist(), self.rd.tolist()))

    @property
    def final(self) -> float:
        return float(self.rd[-1])

    def time_to(self, threshold: float) -> float:
        """First time the metric is at or below ``threshold`` (inf if never)."""
        hit = np.flatnonzero(self.rd <= threshold)
        return float(self.seconds[hit[0]]) if hit.size else float("inf")

    def value_at(self, t: float) -> float:
        """Metric of the last checkpoint recorded no later than ``t`` (nan if none)."""
        k = np.searchsorted(self.seconds, t, side="right") - 1
        return float(self.rd[k]) if k >= 0 else float("nan")


class FixedLambdaFit:
    """Standardize, fit at a fixed lambda, back-transform. Picklable."""

    def __init__(self, penalty: PenaltyConfig, standardize: bool = True):
        self.penalty = penalty
        self.standardize = standardize

    def __call__(self, d):
        if self.standardize and d.p > 0:
            ds, c, s = standardize_columns(d)
        else:
            ds, c, s = d, np.zeros(d.p), np.ones(d.p)
        solver = make_solver(ds.x, ds.y, np.ones(d.n), ds.groups, self.penalty, ds.family)
        return back_transform(solver.solve(self.penalty.lam).beta, c, s)


class CvTunedFit:
    """Standardize, choose lambda by K-fold CV, refit, back-transform."""

    def __init__(self, penalty: PenaltyConfig, K: int = 10, seed: int = 0,
                 rule: str = "min", n_lambda: int = 50, ratio: float = 1e-3):
        self.penalty = penalty
        self.K = K
        self.seed = seed
        self.rule = rule
        self.n_lambda = n_lambda
        self.ratio = ratio

    def __call__(self, d):
        ds, c, s = standardize_columns(d) if d.p > 0 else (d, np.zeros(0), np.ones(0))
        w = np.ones(d.n)
        cv = cross_validate_arrays(ds.x, ds.y, w, ds.groups, self.penalty, ds.family,
                                   None, self.K, np.random.default_rng(self.seed),
                                   self.rule, "default", None, self.n_lambda, self.ratio)
        solver = make_solver(ds.x, ds.y, w, ds.groups, self.penalty, ds.family)
        return back_transform(solver.solve(cv.chosen_lambda).beta, c, s)


def _one_realization(spec, m, fit):
    d, _ = generate(spec, realization=m)
    return fit(d)


def estimate_ground_truth(spec: SimSpec, M: int, fit: Callable,
                          tracked=None, workers: int = 1) -> GroundTruth:
    """Variance of ``fit(dataset)`` over M independent datasets from ``spec``.

    ``fit`` maps a dataset to an intercept-first coefficient vector. ``tracked``
    defaults to the true-group coefficients of ``spec``, or to every
    penalized coefficient when it has no true groups.
    """
    if M < 2:
        raise ValueError("M must be at least 2")
    if workers > 1:
        est = Parallel(n_jobs=workers)(
            delayed(_one_realization)(spec, m, fit) for m in range(M)
        )
    else:
        est = [_one_realization(spec, m, fit) for m in range(M)]
    return ground_truth_from_estimates(np.stack(est), _default_tracked(spec, tracked))


def ground_truth_from_estimates(estimates, tracked) -> GroundTruth:
    est = np.asarray(estimates, dtype=float)
    if est.ndim != 2 or est.shape[0] < 2:
        raise ValueError("need an (M, p+1) array with M >= 2")
    tracked = np.asarray(tracked, dtype=np.intp)
    v = est.var(axis=0, ddof=1)
    return GroundTruth(v, float(v[tracked].sum()), est.shape[0], tracked, est.mean(axis=0))


def _default_tracked(spec: SimSpec, tracked):
    if tracked is not None:
        return np.asarray(tracked, dtype=np.intp)
    if spec.true_groups:
        return spec.tracked_coefficients()
    if spec.p:
        return np.arange(1, spec.p + 1)
    return np.array([0])


def relative_deviation(estimate_trace: float, truth_trace: float) -> float:
    """``|T_hat - T| / T``."""
    if not truth_trace > 0:
        raise ZeroTruthTrace("the true trace must be positive")
    return abs(estimate_trace - truth_trace) / truth_trace


def relative_deviation_sum(xi, truth: GroundTruth) -> float:
    """Sum over tracked coefficients of ``|xi_i^2 - v_i| / v_i``.

    The alternative, per-coefficient form of the metric; it coincides with
    :func:`relative_deviation` only when every relative error is the same.
    """
    xi = np.asarray(xi, dtype=float)[truth.tracked]
    v = truth.v[truth.tracked]
    if np.any(v <= 0):
        raise ZeroTruthTrace("every tracked true variance must be positive")
    return float(np.sum(np.abs(xi**2 - v) / v))


def trace_of_estimate(summary, tracked) -> float:
    """Sum of squared standard errors over the tracked coefficients.

    ``summary`` is a report, a checkpoint (anything with ``.xi``) or a vector.
    """
    xi = np.asarray(getattr(summary, "xi", summary), dtype=float)
    tracked = np.asarray(tracked, dtype=np.intp)
    return float(np.sum(xi[tracked] ** 2))


def rd_trajectory(report, truth: GroundTruth, per_coefficient: bool = False) -> Trajectory:
    """RD of every checkpoint in ``report.trajectory`` against ``truth``.

    Checkpoints that share a timestamp (possible with coarse clocks) keep
    only the last one so time stays strictly increasing.
    """
    secs, rds = [], []
    for cp in report.trajectory:
        if per_coefficient:
            rd = relative_deviation_sum(cp.xi, truth)
        else:
            rd = relative_deviation(trace_of_estimate(cp, truth.tracked), truth.T)
        if secs and cp.seconds <= secs[-1]:
            rds[-1] = rd
            continue
        secs.append(cp.seconds)
        rds.append(rd)
    return Trajectory(np.array(secs), np.array(rds))


def xi_trajectory(report) -> Trajectory:
    """Mean standard error against time, for curves without a ground truth."""
    secs, vals = [], []
    for cp in report.trajectory:
        if secs and cp.seconds <= secs[-1]:
            vals[-1] = cp.xi_mean
            continue
        secs.append(cp.seconds)
        vals.append(cp.xi_mean)
    return Trajectory(np.array(secs), np.array(vals))


@dataclass(frozen=True)
class TrajectoryComparison:
    final_a: float
    final_b: float
    time_to: dict
    first: dict

    def winner(self, threshold: float) -> str:
        return self.first[threshold]


def compare_trajectories(a: Trajectory, b: Trajectory,
                         thresholds=THRESHOLDS) -> TrajectoryComparison:
    """Final values, time to each threshold, and which side got there first.

    ``first[t]`` is ``"a"``, ``"b"``, ``"tie"`` (same time, including both
    never) for each threshold ``t``.
    """
    times, first = {}, {}
    for t in thresholds:
        ta, tb = a.time_to(t), b.time_to(t)
        times[t] = (ta, tb)
        first[t] = "a" if ta < tb else "b" if tb < ta else "tie"
    return TrajectoryComparison(a.final, b.final, times, first)


def write_trajectory_csv(path, trajectories: dict, metric: str = "rd") -> None:
    """Write ``method, seconds, metric, value`` rows for each named trajectory."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "seconds", "metric", "value"])
        for name, tr in trajectories.items():
            for sec, val in tr.points:
                w.writerow([name, repr(float(sec)), metric, repr(float(val))])
