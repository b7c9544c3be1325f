"""Joint asymptotics of the stacked marginal slope estimators.

The per-observation score contributions of all ``p`` marginal fits are
stacked into an ``n x p`` matrix; their average outer product estimates the
covariance of ``sqrt(n) * (beta_hat - beta)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .exceptions import ShapeMismatch, ZeroVariance

_MIN_VARIANCE = 1e-14


@dataclass
class ScoreMatrix:
    """Stacked score contributions; ``columns`` maps back to input column indices."""

    psi: np.ndarray
    columns: np.ndarray

    @property
    def n(self) -> int:
        return self.psi.shape[0]

    @property
    def p(self) -> int:
        return self.psi.shape[1]


@dataclass
class CovarianceEstimate:
    sigma: np.ndarray
    n: int


@dataclass
class ZVector:
    z: np.ndarray
    p_values: np.ndarray


def two_sided_pvalues(z) -> np.ndarray:
    """``2 * Phi(-|z|)``."""
    return 2.0 * ndtr(-np.abs(np.asarray(z, dtype=float)))


def stack_scores(score_columns, columns=None) -> ScoreMatrix:
    """Stack per-column score vectors (each of length ``n``) into an ``n x p`` matrix."""
    cols = [np.asarray(c, dtype=float) for c in score_columns]
    if not cols:
        raise ShapeMismatch("no score columns to stack")
    lengths = {c.shape for c in cols}
    if len(lengths) != 1 or cols[0].ndim != 1:
        raise ShapeMismatch(f"score columns have differing shapes: {sorted(lengths)}")
    psi = np.column_stack(cols)
    if columns is None:
        columns = np.arange(psi.shape[1])
    columns = np.asarray(columns)
    if columns.shape != (psi.shape[1],):
        raise ShapeMismatch("column index map does not match the number of score columns")
    return ScoreMatrix(psi, columns)


def estimate_covariance(scores: ScoreMatrix | np.ndarray) -> CovarianceEstimate:
    """``Sigma_hat = (1/n) * psi' psi``.

    A single BLAS product; it is deterministic for a fixed thread count.
    """
    psi = scores.psi if isinstance(scores, ScoreMatrix) else np.asarray(scores, dtype=float)
    if psi.ndim != 2:
        raise ShapeMismatch(f"score matrix must be 2-D, got shape {psi.shape}")
    n = psi.shape[0]
    sigma = psi.T @ psi / n
    # Exact symmetry; the product is symmetric only up to rounding.
    sigma = 0.5 * (sigma + sigma.T)
    return CovarianceEstimate(sigma, n)


def _sigma(cov) -> np.ndarray:
    return cov.sigma if isinstance(cov, CovarianceEstimate) else np.asarray(cov, dtype=float)


def to_correlation(cov: CovarianceEstimate | np.ndarray) -> np.ndarray:
    """Rescale a covariance matrix to unit diagonal."""
    sigma = _sigma(cov)
    d = np.diag(sigma)
    bad = ~(d > _MIN_VARIANCE)
    if bad.any():
        raise ZeroVariance(f"non-positive variance at columns {np.flatnonzero(bad).tolist()}")
    s = 1.0 / np.sqrt(d)
    corr = sigma * s[:, None] * s[None, :]
    corr = 0.5 * (corr + corr.T)
    np.clip(corr, -1.0, 1.0, out=corr)
    np.fill_diagonal(corr, 1.0)
    return corr


def z_statistics(beta_hat, cov: CovarianceEstimate | np.ndarray, n: int | None = None) -> ZVector:
    """Studentize slopes: ``z_j = beta_j / sqrt(Sigma_jj / n)``."""
    sigma = _sigma(cov)
    if n is None:
        if not isinstance(cov, CovarianceEstimate):
            raise TypeError("n is required when cov is a bare matrix")
        n = cov.n
    beta_hat = np.asarray(beta_hat, dtype=float)
    d = np.diag(sigma)
    if beta_hat.shape != d.shape:
        raise ShapeMismatch(f"{beta_hat.shape[0]} slopes for a {d.shape[0]}-dim covariance")
    bad = ~(d > _MIN_VARIANCE)
    if bad.any():
        raise ZeroVariance(f"non-positive variance at columns {np.flatnonzero(bad).tolist()}")
    z = beta_hat / (np.sqrt(d) / np.sqrt(n))
    return ZVector(z, two_sided_pvalues(z))
