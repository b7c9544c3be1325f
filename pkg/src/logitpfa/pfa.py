"""Principal factor approximation of the false discovery proportion.

The correlation matrix of the Z-statistics is split into ``k`` principal
factors plus a weakly dependent remainder. The realized factors are estimated
from the observed Z-vector and plugged into a closed-form estimate of the
number of false rejections at any p-value threshold ``t``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import sparse
from scipy.optimize import linprog
from scipy.special import ndtr, ndtri

from ._validation import check_alpha, check_square_symmetric, check_threshold
from .exceptions import (
    EmptyGrid,
    InvalidThreshold,
    NoConvergence,
    RankDeficientDesign,
    ShapeMismatch,
)
from .mmm import ZVector, two_sided_pvalues

A_CAP_GAP = 1e-10
A_CAP = A_CAP_GAP ** -0.5
TRIM_FRACTION = 0.9


@dataclass
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass
class FactorModel:
    """Loadings of the leading ``k`` factors.

    Row ``j`` of ``loadings`` is ``b_j``; column ``h`` is
    ``sqrt(lambda_h) * gamma_h``. ``a`` rescales the factor-adjusted residual
    of each coordinate to unit variance; ``capped`` marks coordinates whose
    loadings explain (numerically) all of their variance.
    """

    loadings: np.ndarray
    a: np.ndarray
    capped: np.ndarray
    residual_frobenius: float

    @property
    def k(self) -> int:
        return self.loadings.shape[1]

    @property
    def p(self) -> int:
        return self.loadings.shape[0]

    @classmethod
    def from_loadings(cls, loadings, residual_frobenius: float = float("nan")) -> "FactorModel":
        """Derive ``a`` and ``capped`` from a ``p x k`` loading matrix.

        ``a_j = (1 - sum_h b_jh^2)^{-1/2}``, replaced by ``1e5`` wherever the
        loadings leave less than ``1e-10`` of unit variance unexplained.
        """
        loadings = np.asarray(loadings, dtype=float)
        if loadings.ndim == 1:
            loadings = loadings[:, None]
        explained = np.sum(loadings ** 2, axis=1)
        capped = explained >= 1.0 - A_CAP_GAP
        a = np.full(loadings.shape[0], A_CAP)
        a[~capped] = (1.0 - explained[~capped]) ** -0.5
        return cls(loadings, a, capped, residual_frobenius)

    @classmethod
    def zero(cls, p: int, k: int = 1) -> "FactorModel":
        """A model with all loadings zero, i.e. independent statistics."""
        return cls.from_loadings(np.zeros((p, k)), 0.0)


@dataclass
class FactorEstimate:
    w_hat: np.ndarray
    method: str


@dataclass
class FdpReport:
    t: float
    r: int
    v_hat: float
    fdp_hat: float


class Threshold(NamedTuple):
    t: float
    found: bool


def _zvalues(z) -> np.ndarray:
    return np.asarray(z.z if isinstance(z, ZVector) else z, dtype=float)


def _pvalues(z) -> np.ndarray:
    return z.p_values if isinstance(z, ZVector) else two_sided_pvalues(z)


def spectral_decompose(corr) -> EigenDecomposition:
    """Symmetric eigendecomposition with eigenvalues sorted in descending order.

    Small negative eigenvalues from rounding are clamped to zero; anything
    below ``-1e-8`` is clamped too, but with a warning.
    """
    corr = check_square_symmetric(corr, name="correlation matrix")
    vals, vecs = np.linalg.eigh(corr)
    order = np.argsort(vals, kind="stable")[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    if vals.size and vals[-1] < -1e-8:
        warnings.warn(
            f"correlation matrix has eigenvalue {vals[-1]:.3g}; clamping negatives to 0",
            RuntimeWarning, stacklevel=2,
        )
    np.maximum(vals, 0.0, out=vals)
    return EigenDecomposition(vals, vecs)


def select_num_factors(eigenvalues, epsilon: float = 0.01) -> int:
    """Smallest ``k`` whose discarded spectrum is small relative to the trace.

    Returns the smallest ``k >= 1`` with
    ``sqrt(sum_{h>k} lambda_h^2) / sum_h lambda_h < epsilon``, or ``p`` if
    none qualifies.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    p = lam.size
    total = lam.sum()
    # tail[k] = sum_{h>k} lambda_h^2 (1-based k), accumulated from the small end.
    tail = np.concatenate([np.cumsum((lam ** 2)[::-1])[::-1], [0.0]])
    for k in range(1, p):
        if np.sqrt(tail[k]) / total < epsilon:
            return k
    return p


def build_factor_model(eig: EigenDecomposition, k: int) -> FactorModel:
    lam = eig.eigenvalues
    p = lam.size
    if not 1 <= k <= p:
        raise ValueError(f"number of factors must lie in [1, {p}], got {k}")
    loadings = eig.eigenvectors[:, :k] * np.sqrt(lam[:k])
    return FactorModel.from_loadings(loadings, float(np.sqrt(np.sum(lam[k:] ** 2))))


def trimmed_indices(z, fraction: float = TRIM_FRACTION) -> np.ndarray:
    """Indices of the ``floor(fraction * p)`` smallest ``|z_j|``; ties keep lower ``j``."""
    z = _zvalues(z)
    m = int(np.floor(fraction * z.size))
    return np.sort(np.argsort(np.abs(z), kind="stable")[:m])


def estimate_factors_l2(z, model: FactorModel) -> FactorEstimate:
    """Least squares of ``z_j`` on ``b_j`` over the 90% smallest ``|z_j|``."""
    z = _zvalues(z)
    if z.shape != (model.p,):
        raise ShapeMismatch(f"z has shape {z.shape}, model has p = {model.p}")
    keep = trimmed_indices(z)
    if keep.size < model.k:
        raise RankDeficientDesign(
            f"k = {model.k} exceeds the {keep.size} coordinates kept after trimming")
    B = model.loadings[keep]
    w_hat, _, rank, _ = np.linalg.lstsq(B, z[keep], rcond=None)
    if rank < model.k:
        raise RankDeficientDesign(f"trimmed loading matrix has rank {rank} < k = {model.k}")
    return FactorEstimate(w_hat, "trimmed-least-squares")


def lad_objective(z, model: FactorModel, w) -> float:
    return float(np.sum(np.abs(_zvalues(z) - model.loadings @ np.asarray(w, dtype=float))))


def estimate_factors_l1(z, model: FactorModel) -> FactorEstimate:
    """Least absolute deviations of ``z_j`` on ``b_j`` over all coordinates.

    Solved exactly as the linear program
    ``min 1'(u + v)  s.t.  B w + u - v = z,  u, v >= 0``.
    """
    z = _zvalues(z)
    B = model.loadings
    p, k = B.shape
    if z.shape != (p,):
        raise ShapeMismatch(f"z has shape {z.shape}, model has p = {p}")
    if np.linalg.matrix_rank(B) < k:
        raise RankDeficientDesign(f"loading matrix has rank < k = {k}")
    eye = sparse.identity(p, format="csr")
    A_eq = sparse.hstack([sparse.csr_matrix(B), eye, -eye], format="csr")
    c = np.concatenate([np.zeros(k), np.ones(2 * p)])
    bounds = [(None, None)] * k + [(0, None)] * (2 * p)
    res = linprog(c, A_eq=A_eq, b_eq=z, bounds=bounds, method="highs")
    if res.status != 0:
        raise NoConvergence(f"LAD linear program failed: {res.message}")
    return FactorEstimate(res.x[:k].copy(), "least-absolute-deviations")


def estimate_factors(z, model: FactorModel, method: str) -> FactorEstimate:
    if method in ("l2", "trimmed-least-squares"):
        return estimate_factors_l2(z, model)
    if method in ("l1", "least-absolute-deviations"):
        return estimate_factors_l1(z, model)
    raise ValueError(f"unknown factor method {method!r}; expected 'l1' or 'l2'")


def count_rejections(z, t: float) -> int:
    """``R(t) = #{j : p_j <= t}``."""
    t = check_threshold(t)
    return int(np.count_nonzero(_pvalues(z) <= t))


def factor_effects(model: FactorModel, w: FactorEstimate) -> np.ndarray:
    """``eta_hat_j = b_j' w_hat``."""
    w_hat = np.asarray(w.w_hat, dtype=float)
    if w_hat.shape != (model.k,):
        raise ShapeMismatch(f"factor estimate has {w_hat.size} entries, model has k = {model.k}")
    return model.loadings @ w_hat


def _false_rejection_mass(ts: np.ndarray, a: np.ndarray, eta: np.ndarray) -> np.ndarray:
    # sum_j Phi(a_j (z_{t/2} + eta_j)) + Phi(a_j (z_{t/2} - eta_j)) for each t.
    q = ndtri(ts / 2.0)[:, None]
    return np.sum(ndtr(a * (q + eta)) + ndtr(a * (q - eta)), axis=1)


def fdp_over_grid(z, model: FactorModel, w: FactorEstimate, ts) -> list[FdpReport]:
    """:func:`estimate_fdp` at every threshold of ``ts`` in one vectorized pass."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(~(ts > 0.0) | ~(ts <= 1.0)):
        raise InvalidThreshold("thresholds must lie in (0, 1]")
    pv = _pvalues(z)
    if pv.shape != (model.p,):
        raise ShapeMismatch(f"z has {pv.size} entries, model has p = {model.p}")
    eta = factor_effects(model, w)
    mass = _false_rejection_mass(ts, model.a, eta)
    sorted_p = np.sort(pv)
    rs = np.searchsorted(sorted_p, ts, side="right")
    reports = []
    for t, r, m in zip(ts, rs, mass):
        v = min(float(m), float(r))
        reports.append(FdpReport(float(t), int(r), v, v / float(r) if r > 0 else 0.0))
    return reports


def estimate_fdp(z, model: FactorModel, w: FactorEstimate, t: float) -> FdpReport:
    """Estimated FDP of the rule "reject when the unadjusted p-value is <= t"."""
    t = check_threshold(t, allow_zero=False)
    return fdp_over_grid(z, model, w, [t])[0]


def adjusted_pvalues(z, model: FactorModel, w: FactorEstimate) -> np.ndarray:
    """``2 * Phi(-|a_j (z_j - b_j' w_hat)|)``."""
    z = _zvalues(z)
    eta = factor_effects(model, w)
    return 2.0 * ndtr(-np.abs(model.a * (z - eta)))


def log_grid(t_min: float = 1e-12, t_max: float = 1.0, points: int = 400) -> np.ndarray:
    if points < 1:
        raise EmptyGrid("threshold grid needs at least one point")
    if not 0.0 < t_min <= t_max <= 1.0:
        raise InvalidThreshold(f"grid bounds must satisfy 0 < min <= max <= 1, got {t_min}, {t_max}")
    if points == 1:
        return np.array([t_max])
    grid = np.logspace(np.log10(t_min), np.log10(t_max), points)
    grid[0], grid[-1] = t_min, t_max
    return grid


def threshold_from_reports(reports: list[FdpReport], alpha: float) -> Threshold:
    ok = [rep.t for rep in reports if rep.fdp_hat <= alpha]
    if ok:
        return Threshold(max(ok), True)
    return Threshold(reports[0].t, False)


def find_threshold(z, model: FactorModel, w: FactorEstimate, alpha: float, grid=None) -> Threshold:
    """Largest grid threshold whose estimated FDP does not exceed ``alpha``.

    When no grid point qualifies the smallest one is returned with
    ``found=False``.
    """
    alpha = check_alpha(alpha, upper_inclusive=True)
    grid = log_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise EmptyGrid("threshold grid is empty")
    if np.any(np.diff(grid) < 0):
        raise ValueError("threshold grid must be sorted ascending")
    return threshold_from_reports(fdp_over_grid(z, model, w, grid), alpha)
