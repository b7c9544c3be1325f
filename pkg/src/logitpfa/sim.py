"""Monte Carlo harness for the Gaussian-design simulation scenarios.

Scenario 1 draws i.i.d. N(0, 1) predictors. Scenario 2 splits the columns
into a signal block (the first ``p1``) and a null block, each equicorrelated
at ``rho`` and independent of the other. Scenario 3 is Scenario 2 with an
i.i.d. signal block. The outcome is logistic in the sum of the signal columns
(no intercept), so every signal column is marginally associated with it.
"""
from __future__ import annotations

import csv
import dataclasses
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import expit

from .estimator import LogitPFA
from .exceptions import InvalidConfig, LogitPFAError

log = logging.getLogger(__name__)

FAILED_FRACTION_FLAG = 0.01


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: int = 1
    n: int = 400
    p: int = 500
    p1: int = 10
    rho: float = 0.0
    beta_signal: float = 1.0
    replications: int = 1000
    t_fixed: float = 1e-4
    alpha: float = 0.05
    k: int = 10
    seed: int = 0
    factor_method: str = "l2"
    grid_min: float = 1e-12
    grid_max: float = 1.0
    grid_points: int = 400

    def __post_init__(self):
        problems = []
        if self.scenario not in (1, 2, 3):
            problems.append(f"scenario must be 1, 2 or 3, got {self.scenario}")
        if self.n < 2:
            problems.append("n must be at least 2")
        if not 0 <= self.p1 < self.p:
            problems.append(f"need 0 <= p1 < p, got p1={self.p1}, p={self.p}")
        if not 0.0 <= self.rho < 1.0:
            problems.append(f"rho must lie in [0, 1), got {self.rho}")
        if self.replications < 1:
            problems.append("replications must be positive")
        if not 0.0 < self.t_fixed <= 1.0:
            problems.append(f"t_fixed must lie in (0, 1], got {self.t_fixed}")
        if not 0.0 < self.alpha <= 1.0:
            problems.append(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 1 <= self.k <= self.p:
            problems.append(f"k must lie in [1, p], got {self.k}")
        if self.seed < 0:
            problems.append("seed must be non-negative")
        if self.factor_method not in ("l1", "l2"):
            problems.append(f"factor_method must be 'l1' or 'l2', got {self.factor_method!r}")
        if problems:
            raise InvalidConfig("; ".join(problems))

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class GroundTruth:
    null_mask: np.ndarray

    @classmethod
    def first_signals(cls, p: int, p1: int) -> "GroundTruth":
        return cls(np.arange(p) >= p1)


class DecisionPattern(NamedTuple):
    u: int
    v: int
    t: int
    s: int
    r: int


@dataclass
class ReplicationResult:
    index: int
    fdp_hat: float = np.nan
    r: int = 0
    s: int = 0
    v: int = 0
    t_alpha: float = np.nan
    t_alpha_found: bool = False
    n_dropped: int = 0
    error: str = ""

    @property
    def realized_fdp(self) -> float:
        return self.v / max(self.r, 1)

    @property
    def failed(self) -> bool:
        return bool(self.error)


@dataclass
class SummaryTable:
    median_fdp_hat: float
    se_fdp_hat: float
    mean_r: float
    se_r: float
    mean_s: float
    se_s: float
    median_t_alpha: float
    replications: int
    failed: int
    flagged: bool


def _equicorrelated(rng: np.random.Generator, n: int, m: int, rho: float) -> np.ndarray:
    shared = rng.standard_normal((n, 1))
    own = rng.standard_normal((n, m))
    return np.sqrt(rho) * shared + np.sqrt(1.0 - rho) * own


def replication_rng(seed: int, replication_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, replication_index]))


def generate_dataset(cfg: ScenarioConfig, replication_index: int):
    """Draw ``(X, y, truth)`` for one replication.

    The stream depends only on ``(cfg.seed, replication_index)``, so
    replications can be generated in any order or in parallel.
    """
    rng = replication_rng(cfg.seed, replication_index)
    n, p, p1 = cfg.n, cfg.p, cfg.p1
    if cfg.scenario == 1:
        X = rng.standard_normal((n, p))
    else:
        if cfg.scenario == 2 and p1 > 0:
            signal = _equicorrelated(rng, n, p1, cfg.rho)
        else:
            signal = rng.standard_normal((n, p1))
        X = np.hstack([signal, _equicorrelated(rng, n, p - p1, cfg.rho)])
    eta = cfg.beta_signal * X[:, :p1].sum(axis=1)
    y = (rng.random(n) < expit(eta)).astype(float)
    return X, y, GroundTruth.first_signals(p, p1)


def decision_pattern(p_values, truth: GroundTruth, t: float) -> DecisionPattern:
    """Counts of accepted/rejected true and false nulls at threshold ``t``."""
    p_values = np.asarray(p_values, dtype=float)
    null = np.asarray(truth.null_mask, dtype=bool)
    rejected = p_values <= t
    v = int(np.count_nonzero(rejected & null))
    s = int(np.count_nonzero(rejected & ~null))
    u = int(np.count_nonzero(null)) - v
    t_ = int(np.count_nonzero(~null)) - s
    return DecisionPattern(u, v, t_, s, v + s)


def make_estimator(cfg: ScenarioConfig) -> LogitPFA:
    return LogitPFA(
        alpha=cfg.alpha,
        n_factors=cfg.k,
        factor_method=cfg.factor_method,
        grid_min=cfg.grid_min,
        grid_max=cfg.grid_max,
        grid_points=cfg.grid_points,
    )


def run_replication(cfg: ScenarioConfig, index: int) -> ReplicationResult:
    X, y, truth = generate_dataset(cfg, index)
    try:
        est = make_estimator(cfg).fit(X, y)
        report = est.estimate_fdp(cfg.t_fixed)
    except LogitPFAError as exc:
        log.warning("replication %d failed: %s: %s", index, type(exc).__name__, exc)
        return ReplicationResult(index, error=f"{type(exc).__name__}: {exc}")
    kept = GroundTruth(truth.null_mask[est.columns_])
    pattern = decision_pattern(est.pvalues_, kept, cfg.t_fixed)
    return ReplicationResult(
        index=index,
        fdp_hat=report.fdp_hat,
        r=pattern.r,
        s=pattern.s,
        v=pattern.v,
        t_alpha=est.threshold_,
        t_alpha_found=est.threshold_found_,
        n_dropped=len(est.dropped_),
    )


def _se(values: np.ndarray) -> float:
    return float(np.std(values, ddof=1)) if values.size > 1 else 0.0


def summarize(results: list[ReplicationResult]) -> SummaryTable:
    """Aggregate replications; standard errors are across-replication SDs."""
    good = [res for res in results if not res.failed]
    failed = len(results) - len(good)
    fdp = np.array([res.fdp_hat for res in good])
    r = np.array([res.r for res in good], dtype=float)
    s = np.array([res.s for res in good], dtype=float)
    t_alpha = np.array([res.t_alpha for res in good])
    nan = float("nan")
    return SummaryTable(
        median_fdp_hat=float(np.median(fdp)) if good else nan,
        se_fdp_hat=_se(fdp) if good else nan,
        mean_r=float(r.mean()) if good else nan,
        se_r=_se(r) if good else nan,
        mean_s=float(s.mean()) if good else nan,
        se_s=_se(s) if good else nan,
        median_t_alpha=float(np.median(t_alpha)) if good else nan,
        replications=len(results),
        failed=failed,
        flagged=failed > FAILED_FRACTION_FLAG * len(results),
    )


def run_replications(cfg: ScenarioConfig, n_jobs: int = 1):
    """Run ``cfg.replications`` seeded replications and summarize them.

    Returns ``(summary, results)`` with ``results`` in replication order
    regardless of ``n_jobs``.
    """
    indices = range(cfg.replications)
    if n_jobs == 1:
        results = [run_replication(cfg, i) for i in indices]
    else:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=n_jobs)(delayed(run_replication)(cfg, i) for i in indices)
    summary = summarize(results)
    if summary.flagged:
        log.warning("%d of %d replications failed", summary.failed, summary.replications)
    return summary, results


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


SUMMARY_FIELDS = [f.name for f in dataclasses.fields(SummaryTable)]
REPLICATION_FIELDS = ["replication", "fdp_hat", "r", "s", "v", "realized_fdp",
                      "t_alpha", "t_alpha_found", "n_dropped", "error"]


def write_summary_csv(path, summary: SummaryTable, cfg: ScenarioConfig | None = None) -> None:
    row = {}
    if cfg is not None:
        row.update(dataclasses.asdict(cfg))
    row.update(dataclasses.asdict(summary))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(row))
        writer.writerow([_fmt(v) for v in row.values()])


def write_replications_csv(path, results: list[ReplicationResult]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPLICATION_FIELDS)
        for res in results:
            writer.writerow([_fmt(v) for v in (
                res.index, res.fdp_hat, res.r, res.s, res.v, res.realized_fdp,
                res.t_alpha, res.t_alpha_found, res.n_dropped, res.error)])
