"""BLBVS and BootVS drivers: resampling, fitting, vote and standard-error aggregation.

Work is split into units that are pure functions of the dataset, the
configuration and a fixed RNG key. Units run sequentially or through a
joblib worker pool and are always reduced in key order, so the numbers in a
report never depend on the worker count.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .core import (
    GROUP_LASSO,
    PENALTIES,
    GroupedDataset,
    PenaltyConfig,
    back_transform,
    standardize_columns,
    validate_dataset,
)
from .exceptions import GammaOutOfRange, LengthMismatch
from .resample import (
    STREAM_BOOT,
    STREAM_CV,
    STREAM_WEIGHTS,
    RngSpec,
    bootstrap_sample,
    draw_subsets,
    draw_weights,
    subset_size,
)
from .tuning import CV_LOSSES, CV_RULES, cross_validate_arrays, make_solver

TUNE_MODES = ("resample", "subset", "fixed")


@dataclass(frozen=True)
class BlbvsConfig:
    """Settings shared by :func:`run_blbvs` and :func:`run_bootvs`.

    ``tune`` picks how lambda is chosen: ``"resample"`` runs K-fold CV on every
    resample, ``"subset"`` once per subset (once on the full data for BootVS),
    ``"fixed"`` uses ``lam`` everywhere. ``s=None`` means ``floor(n / b)``.
    ``workers`` only changes scheduling, never results.
    """

    gamma: float = 0.7
    s: int | None = None
    r: int = 100
    cutoff: float = 0.5
    penalty: str = GROUP_LASSO
    rescale: str = "sqrt"
    seed: int = 0
    workers: int = 1
    disjoint: bool = True
    tune: str = "resample"
    lam: float | None = None
    cv_folds: int = 10
    cv_rule: str = "min"
    cv_loss: str = "default"
    n_lambda: int = 50
    lambda_ratio: float = 1e-3
    standardize: bool = True
    ci_level: float = 0.95
    batch: int = 10

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise GammaOutOfRange(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.r < 1:
            raise ValueError("r must be at least 1")
        if self.s is not None and self.s < 1:
            raise ValueError("s must be at least 1")
        if not 0 < self.cutoff < 1:
            raise ValueError("cutoff must lie in (0, 1)")
        if self.penalty not in PENALTIES:
            raise ValueError(f"penalty must be one of {PENALTIES}")
        if self.tune not in TUNE_MODES:
            raise ValueError(f"tune must be one of {TUNE_MODES}")
        if self.tune == "fixed" and (self.lam is None or self.lam < 0):
            raise ValueError("tune='fixed' needs a nonnegative lam")
        if self.cv_rule not in CV_RULES:
            raise ValueError(f"cv_rule must be one of {CV_RULES}")
        if self.cv_loss not in CV_LOSSES:
            raise ValueError(f"cv_loss must be one of {CV_LOSSES}")
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be at least 2")
        if not 0 < self.ci_level < 1:
            raise ValueError("ci_level must lie in (0, 1)")
        if self.workers < 1 or self.batch < 1:
            raise ValueError("workers and batch must be at least 1")

    @property
    def rng(self) -> RngSpec:
        return RngSpec(self.seed)

    def penalty_config(self) -> PenaltyConfig:
        return PenaltyConfig(self.penalty, 0.0, self.rescale)

    def echo(self) -> dict:
        """Settings that determine results (the worker count is left out)."""
        out = asdict(self)
        out.pop("workers")
        return out


@dataclass
class BagOutcome:
    """Fits of one subset (BLBVS) or one batch of resamples (BootVS)."""

    key: int
    betas: np.ndarray
    selected: np.ndarray
    converged: np.ndarray
    separated: np.ndarray
    lams: np.ndarray
    kkt: np.ndarray
    seconds: np.ndarray
    setup_seconds: float = 0.0


@dataclass
class Checkpoint:
    fits: int
    seconds: float
    xi: np.ndarray

    @property
    def xi_mean(self) -> float:
        return _xi_scalar(self.xi)


@dataclass
class BlbvsReport:
    method: str
    group_names: list
    proportions: np.ndarray
    selected: np.ndarray
    xi: np.ndarray
    xi_by_bag: np.ndarray
    intervals: np.ndarray
    trajectory: list
    n_fits: int
    non_converged_count: int
    separated_count: int
    max_kkt_violation: float
    lambdas: np.ndarray
    votes: np.ndarray
    fit_seconds: np.ndarray = field(default_factory=lambda: np.zeros(0))
    config: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    n: int = 0
    p: int = 0

    @property
    def selected_names(self) -> list:
        return [nm for nm, s in zip(self.group_names, self.selected) if s]

    @property
    def xi_mean(self) -> float:
        return _xi_scalar(self.xi)

    def to_dict(self) -> dict:
        """JSON-ready summary. Timings are left out so it is reproducible."""
        kkt = self.max_kkt_violation
        return {
            "method": self.method,
            "n": self.n,
            "p": self.p,
            "config": self.config,
            "group_names": list(self.group_names),
            "proportions": _floats(self.proportions),
            "votes": [int(v) for v in self.votes],
            "selected": [bool(v) for v in self.selected],
            "selected_names": self.selected_names,
            "xi": _floats(self.xi),
            "xi_mean": self.xi_mean,
            "intervals": [_floats(row) for row in self.intervals],
            "trajectory": [{"fits": c.fits, "xi_mean": c.xi_mean} for c in self.trajectory],
            "n_fits": self.n_fits,
            "non_converged_count": self.non_converged_count,
            "separated_count": self.separated_count,
            "max_kkt_violation": None if not np.isfinite(kkt) else float(kkt),
            "lambda_range": _floats([self.lambdas.min(), self.lambdas.max()]),
            "warnings": list(self.warnings),
        }


def _floats(a) -> list:
    return [float(v) for v in np.asarray(a, dtype=float).ravel()]


def _xi_scalar(xi) -> float:
    """Mean standard error over penalized coefficients (intercept if there are none)."""
    xi = np.asarray(xi)
    return float(np.mean(xi[1:]) if xi.size > 1 else xi[0])


def aggregate_votes(indicators) -> np.ndarray:
    """Selection proportion per group from an ``s x r x G`` indicator tensor."""
    ind = np.asarray(indicators, dtype=bool)
    if ind.ndim != 3:
        raise ValueError("indicators must have shape (s, r, G)")
    s, r, _ = ind.shape
    counts = ind.sum(axis=(0, 1), dtype=np.int64)
    return counts / (s * r)


def aggregate_xi(xi_list) -> np.ndarray:
    """Elementwise mean of per-subset standard-error vectors."""
    arrs = [np.asarray(v, dtype=float) for v in xi_list]
    if not arrs:
        raise ValueError("at least one vector is required")
    if any(a.shape != arrs[0].shape for a in arrs):
        raise LengthMismatch("standard-error vectors differ in length")
    return np.mean(np.stack(arrs), axis=0)


def _spread(betas, converged, alpha):
    """Sample standard deviation and percentile bounds over converged fits."""
    use = betas[converged] if converged.any() else betas
    if use.shape[0] >= 2:
        xi = use.std(axis=0, ddof=1)
    else:
        xi = np.zeros(betas.shape[1])
    lo, hi = np.percentile(use, [100 * alpha / 2, 100 * (1 - alpha / 2)], axis=0)
    return xi, np.column_stack([lo, hi]), int(use.shape[0])


def _prepare_bag(d: GroupedDataset, rows, cfg: BlbvsConfig):
    bag = d.take(rows)
    p = d.p
    if cfg.standardize and p > 0:
        bag, centers, scales = standardize_columns(bag)
    else:
        centers, scales = np.zeros(p), np.ones(p)
    return bag, centers, scales


def _tune(x, y, weights, bag, penalty, cfg, rng):
    cv = cross_validate_arrays(
        x, y, weights, bag.groups, penalty, bag.family, None, cfg.cv_folds,
        rng, cfg.cv_rule, cfg.cv_loss, None, cfg.n_lambda, cfg.lambda_ratio,
    )
    return cv.chosen_lambda


def _fit_one(bag, weights, lam, penalty, cfg, cv_rng, warm=None):
    x, y = bag.x, bag.y
    keep = weights > 0
    x, y, weights = x[keep], y[keep], weights[keep].astype(float)
    solver = make_solver(x, y, weights, bag.groups, penalty, bag.family)
    if lam is None:
        lam = _tune(x, y, weights, bag, penalty, cfg, cv_rng)
        warm = None
    res = solver.solve(lam, warm)
    return res, solver.kkt(res.beta, lam)


def _run_bag(d, rows, key, weight_draws, cfg, stream, subset_tuning):
    """Fit every weighted resample of one bag of rows.

    ``weight_draws`` is a list of ``(j, weights)`` with weights aligned to
    ``rows``. Returns a :class:`BagOutcome` in original coefficient scale.
    """
    t0 = time.perf_counter()
    bag, centers, scales = _prepare_bag(d, rows, cfg)
    penalty = cfg.penalty_config()
    lam_fixed, warm = None, None
    if cfg.tune == "fixed":
        lam_fixed = float(cfg.lam)
    elif subset_tuning:
        ones = np.ones(bag.n)
        lam_fixed = _tune(bag.x, bag.y, ones, bag, penalty, cfg,
                          cfg.rng.generator(STREAM_CV, stream, key))
    if lam_fixed is not None and stream == 0:
        solver = make_solver(bag.x, bag.y, np.ones(bag.n), bag.groups, penalty, bag.family)
        warm = solver.solve(lam_fixed).beta
    setup = time.perf_counter() - t0
    m = len(weight_draws)
    out = BagOutcome(
        key=key,
        betas=np.zeros((m, d.p + 1)),
        selected=np.zeros((m, d.groups.n_groups), dtype=bool),
        converged=np.zeros(m, dtype=bool),
        separated=np.zeros(m, dtype=bool),
        lams=np.zeros(m),
        kkt=np.zeros(m),
        seconds=np.zeros(m),
        setup_seconds=setup,
    )
    for t, (j, weights) in enumerate(weight_draws):
        t1 = time.perf_counter()
        cv_rng = cfg.rng.generator(STREAM_CV, stream, key, j)
        res, viol = _fit_one(bag, weights, lam_fixed, penalty, cfg, cv_rng, warm)
        out.betas[t] = back_transform(res.beta, centers, scales)
        out.selected[t] = res.selected
        out.converged[t] = res.converged
        out.separated[t] = res.separated
        out.lams[t] = res.lam
        out.kkt[t] = viol
        out.seconds[t] = time.perf_counter() - t1
    return out


def _blb_unit(d, subset, i, cfg):
    draws = []
    for j in range(cfg.r):
        ws = draw_weights(subset, cfg.rng.generator(STREAM_WEIGHTS, i, j))
        draws.append((j, ws.weights))
    return _run_bag(d, subset.indices, i, draws, cfg, 0, cfg.tune == "subset")


def _boot_unit(d, k, j_range, cfg):
    n = d.n
    draws = []
    for j in j_range:
        ws = bootstrap_sample(n, cfg.rng.generator(STREAM_BOOT, j))
        full = np.zeros(n, dtype=np.int64)
        full[ws.indices] = ws.weights
        draws.append((j, full))
    return _run_bag(d, np.arange(n), k, draws, cfg, 1, False)


def _execute(tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [f(*args) for f, args in tasks]
    return Parallel(n_jobs=workers)(delayed(f)(*args) for f, args in tasks)


def resolve_s(n: int, cfg: BlbvsConfig) -> int:
    b = subset_size(n, cfg.gamma)
    return cfg.s if cfg.s is not None else max(1, n // b)


def run_blbvs(d: GroupedDataset, cfg: BlbvsConfig) -> BlbvsReport:
    """Bag of little bootstraps variable selection.

    Draws ``s`` subsets of ``b = floor(n ** gamma)`` rows, fits ``r``
    multinomially weighted size-n resamples of each, and aggregates group
    votes over all ``s * r`` fits and per-subset standard errors by averaging.
    """
    validate_dataset(d)
    s = resolve_s(d.n, cfg)
    subsets = draw_subsets(d.n, s, cfg.gamma, cfg.rng, cfg.disjoint)
    tasks = [(_blb_unit, (d, sub, i, cfg)) for i, sub in enumerate(subsets)]
    bags = _execute(tasks, cfg.workers)
    return _assemble("blbvs", d, cfg, bags, per_bag_xi=True)


def run_bootvs(d: GroupedDataset, r_total: int, cfg: BlbvsConfig) -> BlbvsReport:
    """Conventional bootstrap variable selection with ``r_total`` resamples.

    Resamples are stored as distinct rows plus counts so the weighted solvers
    apply unchanged. Trajectory checkpoints are taken every ``cfg.batch`` fits.
    """
    validate_dataset(d)
    if r_total < 1:
        raise ValueError("r_total must be at least 1")
    if cfg.tune == "subset":
        # tune once on the full data, then reuse lambda for every resample
        bag, _, _ = _prepare_bag(d, np.arange(d.n), cfg)
        t0 = time.perf_counter()
        lam = _tune(bag.x, bag.y, np.ones(d.n), bag, cfg.penalty_config(), cfg,
                    cfg.rng.generator(STREAM_CV, 1))
        tune_seconds = time.perf_counter() - t0
        run_cfg = _replace(cfg, tune="fixed", lam=lam)
    else:
        tune_seconds, run_cfg = 0.0, cfg
    starts = range(0, r_total, cfg.batch)
    tasks = [
        (_boot_unit, (d, k, range(a, min(a + cfg.batch, r_total)), run_cfg))
        for k, a in enumerate(starts)
    ]
    bags = _execute(tasks, cfg.workers)
    if bags:
        bags[0].setup_seconds += tune_seconds
    return _assemble("bootvs", d, cfg, bags, per_bag_xi=False)


def _replace(cfg, **changes):
    vals = asdict(cfg)
    vals.update(changes)
    return BlbvsConfig(**vals)


def _assemble(method, d, cfg, bags, per_bag_xi):
    alpha = 1.0 - cfg.ci_level
    notes = []
    betas = np.concatenate([b.betas for b in bags])
    conv = np.concatenate([b.converged for b in bags])
    sel = np.concatenate([b.selected for b in bags])
    kkt = np.concatenate([b.kkt for b in bags])
    if per_bag_xi:
        xis, ivs = [], []
        for b in bags:
            xi_i, iv_i, used = _spread(b.betas, b.converged, alpha)
            if used < 2:
                notes.append(f"subset {b.key}: fewer than two usable fits, xi set to 0")
            xis.append(xi_i)
            ivs.append(iv_i)
        xi_by_bag = np.stack(xis)
        xi = aggregate_xi(xis)
        intervals = np.mean(np.stack(ivs), axis=0)
        indicators = np.stack([b.selected for b in bags])
    else:
        xi, intervals, used = _spread(betas, conv, alpha)
        if used < 2:
            notes.append("fewer than two usable fits, xi set to 0")
        xi_by_bag = xi[None, :]
        indicators = sel[None, :, :]
    votes = indicators.sum(axis=(0, 1), dtype=np.int64)
    proportions = aggregate_votes(indicators)
    n_bad = int((~conv).sum())
    if n_bad:
        notes.append(f"{n_bad} fits did not converge; excluded from xi, kept in votes")
    trajectory = _trajectory(bags, per_bag_xi, alpha)
    for msg in notes:
        warnings.warn(msg, RuntimeWarning, stacklevel=3)
    return BlbvsReport(
        method=method,
        group_names=list(d.groups.names),
        proportions=proportions,
        selected=proportions > cfg.cutoff,
        xi=xi,
        xi_by_bag=xi_by_bag,
        intervals=intervals,
        trajectory=trajectory,
        n_fits=int(betas.shape[0]),
        non_converged_count=n_bad,
        separated_count=int(np.concatenate([b.separated for b in bags]).sum()),
        max_kkt_violation=float(kkt[conv].max()) if conv.any() else float("nan"),
        lambdas=np.concatenate([b.lams for b in bags]),
        votes=votes,
        fit_seconds=np.concatenate([b.seconds for b in bags]),
        config=cfg.echo(),
        warnings=notes,
        n=d.n,
        p=d.p,
    )


def _trajectory(bags, per_bag_xi, alpha):
    points = []
    clock = 0.0
    if per_bag_xi:
        running = []
        fits = 0
        for b in bags:
            clock += b.setup_seconds + float(b.seconds.sum())
            running.append(_spread(b.betas, b.converged, alpha)[0])
            fits += len(b.seconds)
            points.append(Checkpoint(fits, clock, aggregate_xi(running)))
    else:
        seen_b, seen_c = [], []
        for b in bags:
            clock += b.setup_seconds + float(b.seconds.sum())
            seen_b.append(b.betas)
            seen_c.append(b.converged)
            allb, allc = np.concatenate(seen_b), np.concatenate(seen_c)
            points.append(Checkpoint(len(allb), clock, _spread(allb, allc, alpha)[0]))
    return points
