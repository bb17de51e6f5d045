"""Command-line entry point: ``blbvs run ...``.

Exit codes: 0 on success, 1 on a usage error, 2 on a data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from importlib import resources
from pathlib import Path

import jsonschema

from .core import BINOMIAL, FAMILIES, GROUP_LASSO, PENALTIES, PenaltyConfig
from .dataio import CATEGORICAL, ColumnSpec, infer_specs, ingest_csv, read_table
from .diagnostics import CvTunedFit, FixedLambdaFit, estimate_ground_truth, rd_trajectory
from .engine import BlbvsConfig, run_blbvs, run_bootvs
from .exceptions import BlbvsError, DataError
from .simgen import SimSpec, generate

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blbvs", description="Bootstrap variable selection.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="run BLBVS and/or BootVS and write a report")

    src = run.add_argument_group("data")
    src.add_argument("--simulate", choices=["default"], help="use the built-in simulation")
    src.add_argument("--input", type=Path, help="CSV file with a header row")
    src.add_argument("--response", default="y", help="response column (default: y)")
    src.add_argument("--categorical", default="",
                     help="comma-separated columns to dummy-code (others are inferred)")
    src.add_argument("--reference", action="append", default=[], metavar="COL=LEVEL",
                     help="reference level for a categorical column")
    src.add_argument("--group-spec", type=Path, help="column,group sidecar file")
    src.add_argument("--n", type=int, default=20_000, help="simulated sample size")
    src.add_argument("--beta-style", choices=["scalar", "spread"], default="scalar")
    src.add_argument("--noise-beta", choices=["normal", "zero"], default="normal")
    src.add_argument("--sim-seed", type=int, help="simulation seed (default: --seed)")

    m = run.add_argument_group("method")
    m.add_argument("--method", choices=["blbvs", "bootvs", "both"], default="blbvs")
    m.add_argument("--family", choices=FAMILIES, default=BINOMIAL)
    m.add_argument("--penalty", choices=PENALTIES, default=GROUP_LASSO)
    m.add_argument("--gamma", type=float, default=0.7)
    m.add_argument("--subsets", type=int, help="number of subsets s (default n // b)")
    m.add_argument("--r", type=int, default=100, help="resamples per subset")
    m.add_argument("--r-total", type=int, default=100, help="BootVS resamples")
    m.add_argument("--cutoff", type=float, default=0.5)
    m.add_argument("--overlapping", action="store_true",
                   help="draw subsets independently instead of disjointly")
    m.add_argument("--no-standardize", action="store_true")

    t = run.add_argument_group("tuning")
    t.add_argument("--folds", type=int, default=10)
    t.add_argument("--cv-rule", choices=["min", "1se"], default="min")
    t.add_argument("--cv-loss", choices=["default", "deviance", "squared", "misclass"],
                   default="default")
    t.add_argument("--tune-per-subset", action="store_true",
                   help="one CV per subset (BootVS: one CV on the full data)")
    t.add_argument("--lam", type=float, help="fixed lambda; skips cross-validation")

    o = run.add_argument_group("execution and output")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--workers", type=int, default=1)
    o.add_argument("--out", type=Path, default=Path("blbvs-out"))
    o.add_argument("--ground-truth", type=int, metavar="M",
                   help="simulation only: add RD curves against M Monte Carlo realizations")
    return parser


def _config(args) -> BlbvsConfig:
    if args.lam is not None:
        tune = "fixed"
    elif args.tune_per_subset:
        tune = "subset"
    else:
        tune = "resample"
    try:
        return BlbvsConfig(
            gamma=args.gamma, s=args.subsets, r=args.r, cutoff=args.cutoff,
            penalty=args.penalty, seed=args.seed, workers=args.workers,
            disjoint=not args.overlapping, tune=tune, lam=args.lam,
            cv_folds=args.folds, cv_rule=args.cv_rule, cv_loss=args.cv_loss,
            standardize=not args.no_standardize,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _sim_spec(args) -> SimSpec:
    seed = args.seed if args.sim_seed is None else args.sim_seed
    try:
        return SimSpec(n=args.n, beta_style=args.beta_style, noise_beta=args.noise_beta,
                       family=args.family, seed=seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load(args):
    if (args.simulate is None) == (args.input is None):
        raise UsageError("give exactly one of --simulate or --input")
    if args.simulate:
        spec = _sim_spec(args)
        return generate(spec)[0], spec
    if not args.input.exists():
        raise UsageError(f"input file {args.input} does not exist")
    refs = {}
    for item in args.reference:
        if "=" not in item:
            raise UsageError(f"--reference expects COL=LEVEL, got {item!r}")
        col, lv = item.split("=", 1)
        refs[col] = lv
    cats = {c for c in args.categorical.split(",") if c}
    header, rows = read_table(args.input)
    specs = []
    for s in infer_specs(header, rows, args.response):
        if s.name in cats or s.kind == CATEGORICAL or s.name in refs:
            s = ColumnSpec(s.name, CATEGORICAL, refs.get(s.name))
        specs.append(s)
    d = ingest_csv(args.input, args.response, specs, args.family, args.group_spec)
    return d, None


def _run_methods(d, cfg, args):
    reports = {}
    if args.method in ("blbvs", "both"):
        reports["blbvs"] = run_blbvs(d, cfg)
    if args.method in ("bootvs", "both"):
        if args.r_total < 1:
            raise UsageError("--r-total must be at least 1")
        reports["bootvs"] = run_bootvs(d, args.r_total, cfg)
    return reports


def _write_outputs(out: Path, reports: dict, truth=None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    if len(reports) == 1:
        payload = next(iter(reports.values())).to_dict()
    else:
        payload = {k: r.to_dict() for k, r in reports.items()}
    validate_report(payload)
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)
    (out / "report.json").write_text(text + "\n", encoding="utf-8")

    with open(out / "proportions.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "group", "p_g", "selected"])
        for name, rep in reports.items():
            for g, p, s in zip(rep.group_names, rep.proportions, rep.selected):
                w.writerow([name, g, repr(float(p)), int(bool(s))])

    with open(out / "trajectory.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "seconds", "metric", "value"])
        for name, rep in reports.items():
            for cp in rep.trajectory:
                w.writerow([name, repr(float(cp.seconds)), "xi_mean", repr(cp.xi_mean)])
            if truth is not None:
                for sec, rd in rd_trajectory(rep, truth).points:
                    w.writerow([name, repr(sec), "rd", repr(rd)])


def load_schema() -> dict:
    text = resources.files("blbvs").joinpath("report.schema.json").read_text("utf-8")
    return json.loads(text)


def validate_report(payload: dict) -> None:
    jsonschema.validate(payload, load_schema())


def _ground_truth(args, spec, cfg):
    if args.ground_truth is None:
        return None
    if spec is None:
        raise UsageError("--ground-truth needs --simulate")
    if args.ground_truth < 2:
        raise UsageError("--ground-truth needs M >= 2")
    penalty = PenaltyConfig(cfg.penalty, 0.0, cfg.rescale)
    if args.lam is not None:
        fit = FixedLambdaFit(penalty.with_lambda(args.lam), cfg.standardize)
    else:
        fit = CvTunedFit(penalty, cfg.cv_folds, cfg.seed, cfg.cv_rule)
    return estimate_ground_truth(spec, args.ground_truth, fit, workers=cfg.workers)


def cmd_run(args) -> int:
    cfg = _config(args)
    d, spec = _load(args)
    reports = _run_methods(d, cfg, args)
    truth = _ground_truth(args, spec, cfg)
    _write_outputs(args.out, reports, truth)
    for name, rep in reports.items():
        chosen = ", ".join(rep.selected_names) or "(none)"
        print(f"{name}: selected {chosen}; mean xi {rep.xi_mean:.6g}")
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", RuntimeWarning)
            code = cmd_run(args)
        for wmsg in caught:
            print(f"warning: {wmsg.message}", file=sys.stderr)
        return code
    except UsageError as exc:
        print(f"blbvs: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"blbvs: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (BlbvsError, ValueError) as exc:
        print(f"blbvs: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
