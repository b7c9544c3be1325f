"""Command line entry point: ``analyze``, ``fdp-curve`` and ``simulate``.

Exit codes: 0 success, 2 parse or configuration error, 3 pipeline error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import pfa, sim
from .data import read_dataset
from .estimator import LogitPFA
from .exceptions import InvalidConfig, LogitPFAError, ParseError

log = logging.getLogger("logitpfa")

THREADS_ENV = "LOGITPFA_NUM_THREADS"
EXIT_OK, EXIT_CONFIG, EXIT_PIPELINE = 0, 2, 3


@dataclass
class AnalysisConfig:
    input_path: str
    labels: str
    alpha: float = 0.05
    k: int | None = None
    epsilon: float = 0.01
    factor_method: str = "l1"
    grid_min: float = 1e-12
    grid_max: float = 1.0
    grid_points: int = 400
    output_dir: str | None = None
    drop_policy: str = "drop"
    fixed_thresholds: list[float] = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InvalidConfig(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.k is None and not 0.0 < self.epsilon < 1.0:
            raise InvalidConfig(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.k is not None and self.k < 1:
            raise InvalidConfig(f"k must be positive, got {self.k}")
        if self.factor_method not in ("l1", "l2"):
            raise InvalidConfig(f"factor method must be l1 or l2, got {self.factor_method!r}")
        if self.drop_policy not in ("drop", "fail"):
            raise InvalidConfig(f"drop policy must be drop or fail, got {self.drop_policy!r}")
        if self.grid_points < 1 or not 0.0 < self.grid_min <= self.grid_max <= 1.0:
            raise InvalidConfig("threshold grid needs 0 < grid-min <= grid-max <= 1 and >= 1 point")
        for t in self.fixed_thresholds:
            if not 0.0 < t <= 1.0:
                raise InvalidConfig(f"fixed threshold {t} outside (0, 1]")


@dataclass
class AnalysisReport:
    hypotheses: list[dict]
    dropped: list[dict]
    summary: dict
    fdp_curve: list[pfa.FdpReport]
    z_histogram: list[dict]


def _estimator(cfg: AnalysisConfig) -> LogitPFA:
    return LogitPFA(
        alpha=cfg.alpha,
        n_factors=cfg.k,
        epsilon=cfg.epsilon,
        factor_method=cfg.factor_method,
        grid_min=cfg.grid_min,
        grid_max=cfg.grid_max,
        grid_points=cfg.grid_points,
        drop_failed=cfg.drop_policy == "drop",
    )


def analyze(cfg: AnalysisConfig) -> AnalysisReport:
    """Run the whole procedure on a CSV matrix and collect the report tables."""
    data = read_dataset(cfg.input_path, cfg.labels)
    est = _estimator(cfg).fit(data.X, data.y)
    for j, reason in est.dropped_.items():
        log.warning("dropped column %d (%s): %s", j, data.labels[j], reason)

    order = np.lexsort((est.columns_, est.adjusted_pvalues_))
    hypotheses = [
        {
            "column": int(est.columns_[i]),
            "label": data.labels[est.columns_[i]],
            "beta_hat": float(est.coef_[i]),
            "z": float(est.z_[i]),
            "p_value": float(est.pvalues_[i]),
            "adjusted_p_value": float(est.adjusted_pvalues_[i]),
            "rejected": bool(est.rejected_[i]),
        }
        for i in order
    ]
    dropped = [{"column": j, "label": data.labels[j], "reason": reason}
               for j, reason in est.dropped_.items()]

    at_alpha = est.estimate_fdp(est.threshold_)
    summary = {
        "n": int(data.X.shape[0]),
        "p_input": int(data.X.shape[1]),
        "p_analyzed": int(est.columns_.size),
        "p_dropped": len(dropped),
        "k": int(est.n_factors_),
        "eigenvalue_mass_explained": est.explained_variance_ratio_,
        "residual_frobenius": est.factor_model_.residual_frobenius,
        "capped_coordinates": int(est.factor_model_.capped.sum()),
        "factor_method": cfg.factor_method,
        "alpha": cfg.alpha,
        "t_alpha": est.threshold_,
        "t_alpha_found": bool(est.threshold_found_),
        "r_t_alpha": at_alpha.r,
        "v_hat_t_alpha": at_alpha.v_hat,
        "fdp_hat_t_alpha": at_alpha.fdp_hat,
        "n_rejected_adjusted": int(est.rejected_.sum()),
        "z_mean": float(np.mean(est.z_)),
        "z_sd": float(np.std(est.z_, ddof=1)),
        "fixed_thresholds": [
            {"t": rep.t, "r": rep.r, "v_hat": rep.v_hat, "fdp_hat": rep.fdp_hat}
            for rep in (est.fdp_curve(cfg.fixed_thresholds) if cfg.fixed_thresholds else [])
        ],
    }
    counts, edges = np.histogram(est.z_, bins="auto")
    hist = [{"left": float(lo), "right": float(hi), "count": int(c)}
            for lo, hi, c in zip(edges[:-1], edges[1:], counts)]
    return AnalysisReport(hypotheses, dropped, summary, est.fdp_curve_, hist)


def fdp_curve(cfg: AnalysisConfig) -> list[pfa.FdpReport]:
    data = read_dataset(cfg.input_path, cfg.labels)
    return _estimator(cfg).fit(data.X, data.y).fdp_curve_


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_rows(fh, header, rows) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def write_fdp_curve(fh, curve: list[pfa.FdpReport]) -> None:
    _write_rows(fh, ["t", "R", "V_hat", "FDP_hat"],
                ((rep.t, rep.r, rep.v_hat, rep.fdp_hat) for rep in curve))


def write_report(report: AnalysisReport, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    keys = ["column", "label", "beta_hat", "z", "p_value", "adjusted_p_value", "rejected"]
    with open(out / "hypotheses.csv", "w", newline="") as fh:
        _write_rows(fh, keys, ([h[k] for k in keys] for h in report.hypotheses))
    with open(out / "dropped.csv", "w", newline="") as fh:
        _write_rows(fh, ["column", "label", "reason"],
                    ((d["column"], d["label"], d["reason"]) for d in report.dropped))
    with open(out / "fdp_curve.csv", "w", newline="") as fh:
        write_fdp_curve(fh, report.fdp_curve)
    with open(out / "z_histogram.csv", "w", newline="") as fh:
        _write_rows(fh, ["left", "right", "count"],
                    ((b["left"], b["right"], b["count"]) for b in report.z_histogram))
    with open(out / "summary.json", "w") as fh:
        json.dump(report.summary, fh, indent=2)
        fh.write("\n")


def simulate(cfg: sim.ScenarioConfig, out_dir, n_jobs: int = 1) -> sim.SummaryTable:
    summary, results = sim.run_replications(cfg, n_jobs=n_jobs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sim.write_summary_csv(out / "summary.csv", summary, cfg)
    sim.write_replications_csv(out / "replications.csv", results)
    return summary


def _add_data_options(sp: argparse.ArgumentParser, *, out_required: bool) -> None:
    sp.add_argument("--input", dest="input_path", help="CSV matrix with a header row")
    sp.add_argument("--labels", help="label column name in the input, or a label file")
    sp.add_argument("--alpha", type=float, default=0.05)
    grp = sp.add_mutually_exclusive_group()
    grp.add_argument("--k", type=int, default=None, help="force the number of factors")
    grp.add_argument("--epsilon", type=float, default=0.01)
    sp.add_argument("--factor-method", choices=["l1", "l2"], default="l1")
    sp.add_argument("--drop-policy", choices=["drop", "fail"], default="drop")
    _add_grid_options(sp)
    sp.add_argument("--t", dest="fixed_thresholds", type=float, action="append", default=[],
                    help="also report the estimated FDP at this threshold (repeatable)")
    sp.add_argument("--out", dest="output_dir", required=False,
                    help="output directory" + ("" if out_required else " (default: stdout)"))


def _add_grid_options(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--grid-min", type=float, default=1e-12)
    sp.add_argument("--grid-max", type=float, default=1.0)
    sp.add_argument("--grid-points", type=int, default=400)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logitpfa",
        description="Marginal logistic testing with principal-factor FDP estimation.")
    parser.add_argument("--config", help="JSON/YAML file with option defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_data_options(sub.add_parser("analyze", help="run the full analysis"), out_required=True)
    _add_data_options(sub.add_parser("fdp-curve", help="write (t, R, V_hat, FDP_hat) rows"),
                      out_required=False)

    sp = sub.add_parser("simulate", help="Monte Carlo replications of a scenario")
    sp.add_argument("--scenario", type=int, choices=[1, 2, 3], default=1)
    sp.add_argument("--n", type=int, default=400)
    sp.add_argument("--p", type=int, default=500)
    sp.add_argument("--p1", type=int, default=10)
    sp.add_argument("--rho", type=float, default=0.0)
    sp.add_argument("--beta", dest="beta_signal", type=float, default=1.0)
    sp.add_argument("--reps", dest="replications", type=int, default=1000)
    sp.add_argument("--t", dest="t_fixed", type=float, default=1e-4)
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--k", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--factor-method", choices=["l1", "l2"], default="l2")
    _add_grid_options(sp)
    sp.add_argument("--jobs", type=int, default=None,
                    help=f"parallel replications (default: ${THREADS_ENV} or 1)")
    sp.add_argument("--out", dest="output_dir")
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise InvalidConfig(f"config {path} must be a mapping")
    return cfg


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:
        if name in action.choices:
            return action.choices[name]
    raise KeyError(name)


def parse_args(argv=None) -> argparse.Namespace:
    """Parse flags, filling unset options from ``--config`` when given."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    cfg = _load_config(args.config)
    section = cfg.get(args.command, cfg)
    sp = _subparser(parser, args.command)
    by_flag = {}
    for action in sp._actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                by_flag[opt[2:]] = action.dest
        by_flag.setdefault(action.dest, action.dest)
    defaults = {}
    for key, value in section.items():
        if key in parser._subparsers._group_actions[0].choices:
            continue
        dest = by_flag.get(str(key).replace("_", "-")) or by_flag.get(str(key))
        if dest is None or dest == "help":
            raise InvalidConfig(f"unknown config key {key!r} for {args.command}")
        if dest == "fixed_thresholds" and not isinstance(value, list):
            value = [value]
        defaults[dest] = value
    sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def _analysis_config(args) -> AnalysisConfig:
    if not args.input_path or not args.labels:
        raise InvalidConfig("--input and --labels are required")
    return AnalysisConfig(
        input_path=args.input_path,
        labels=str(args.labels),
        alpha=float(args.alpha),
        k=None if args.k is None else int(args.k),
        epsilon=float(args.epsilon),
        factor_method=args.factor_method,
        grid_min=float(args.grid_min),
        grid_max=float(args.grid_max),
        grid_points=int(args.grid_points),
        output_dir=args.output_dir,
        drop_policy=args.drop_policy,
        fixed_thresholds=[float(t) for t in args.fixed_thresholds],
    )


def _jobs(args) -> int:
    if args.jobs is not None:
        return int(args.jobs)
    env = os.environ.get(THREADS_ENV)
    if env is None:
        return 1
    try:
        return int(env)
    except ValueError as exc:
        raise InvalidConfig(f"{THREADS_ENV} must be an integer, got {env!r}") from exc


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except InvalidConfig as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "simulate":
            if not args.output_dir:
                raise InvalidConfig("--out is required")
            cfg = sim.ScenarioConfig(
                scenario=args.scenario, n=args.n, p=args.p, p1=args.p1, rho=args.rho,
                beta_signal=args.beta_signal, replications=args.replications,
                t_fixed=args.t_fixed, alpha=args.alpha, k=args.k, seed=args.seed,
                factor_method=args.factor_method, grid_min=args.grid_min,
                grid_max=args.grid_max, grid_points=args.grid_points,
            )
            summary = simulate(cfg, args.output_dir, n_jobs=_jobs(args))
            if summary.flagged:
                log.warning("more than 1%% of replications failed; see replications.csv")
        elif args.command == "analyze":
            cfg = _analysis_config(args)
            if not cfg.output_dir:
                raise InvalidConfig("--out is required")
            write_report(analyze(cfg), cfg.output_dir)
        else:
            cfg = _analysis_config(args)
            curve = fdp_curve(cfg)
            if cfg.output_dir:
                Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
                with open(Path(cfg.output_dir) / "fdp_curve.csv", "w", newline="") as fh:
                    write_fdp_curve(fh, curve)
            else:
                write_fdp_curve(sys.stdout, curve)
    except (InvalidConfig, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LogitPFAError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
