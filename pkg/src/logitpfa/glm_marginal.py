"""Per-column binary logistic regressions and their score contributions.

Every predictor column ``X[:, j]`` gets its own two-parameter model
``logit P(Y = 1 | X_j) = alpha_j + X_j * beta_j``. The fits are independent,
so they are carried out simultaneously as one vectorized Newton-Raphson
iteration over all columns; :func:`fit_logistic` is the single-column view of
the same routine.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, logit

from ._validation import check_binary_outcome, check_matrix
from .exceptions import (
    DegenerateInput,
    LogitPFAError,
    NoConvergence,
    SeparationDetected,
    SingularInformation,
)

OK = "ok"

_ERRORS: dict[str, type[LogitPFAError]] = {
    cls.__name__: cls
    for cls in (DegenerateInput, SeparationDetected, NoConvergence, SingularInformation)
}


@dataclass(frozen=True)
class SolverOptions:
    """Newton-Raphson settings shared by all marginal fits."""

    tol: float = 1e-8
    max_iter: int = 50
    separation_bound: float = 1e3
    max_halvings: int = 30


@dataclass
class MarginalFit:
    alpha_hat: float
    beta_hat: float
    pi_hat: np.ndarray
    converged: bool
    iterations: int
    log_likelihood: float


@dataclass
class BatchFit:
    """Result of fitting one marginal model per column of an ``n x p`` matrix.

    ``status[j]`` is ``"ok"`` for a converged column and otherwise the name of
    the error class that stopped it. Failed columns carry NaN estimates.
    """

    alpha: np.ndarray
    beta: np.ndarray
    pi: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray
    log_likelihood: np.ndarray
    status: np.ndarray
    messages: list[str] = field(default_factory=list)

    @property
    def ok(self) -> np.ndarray:
        return self.status == OK

    def column(self, j: int) -> MarginalFit:
        if self.status[j] != OK:
            raise _ERRORS[self.status[j]](self.messages[j])
        return MarginalFit(
            alpha_hat=float(self.alpha[j]),
            beta_hat=float(self.beta[j]),
            pi_hat=self.pi[:, j].copy(),
            converged=bool(self.converged[j]),
            iterations=int(self.iterations[j]),
            log_likelihood=float(self.log_likelihood[j]),
        )


def log_likelihood(alpha, beta, x, y) -> np.ndarray:
    """Logistic log-likelihood sum_i y_i*eta_i - log(1 + exp(eta_i)).

    Broadcasts over columns when ``x`` is ``n x p`` and ``alpha``/``beta``
    have length ``p``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    eta = alpha + x * beta
    if x.ndim == 2:
        y = y[:, None]
    return np.sum(y * eta - np.logaddexp(0.0, eta), axis=0)


def _separated(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    # With one regressor the MLE exists iff the class ranges overlap strictly.
    x0 = X[y == 0]
    x1 = X[y == 1]
    return (x0.max(axis=0) <= x1.min(axis=0)) | (x1.max(axis=0) <= x0.min(axis=0))


def fit_logistic_batch(X, y, opts: SolverOptions | None = None) -> BatchFit:
    """Fit ``logit P(Y=1) = alpha_j + x_j beta_j`` for every column of ``X``.

    Newton-Raphson with step-halving on log-likelihood decrease, started from
    the intercept-only MLE. Columns that cannot be fitted are reported via
    ``status`` rather than raised, so one bad column never aborts the batch.
    """
    opts = opts or SolverOptions()
    X = check_matrix(X, min_rows=2)
    y = check_binary_outcome(y, X.shape[0])
    n, p = X.shape

    status = np.full(p, OK, dtype=object)
    messages = [""] * p
    alpha = np.full(p, np.nan)
    beta = np.full(p, np.nan)
    converged = np.zeros(p, dtype=bool)
    iterations = np.zeros(p, dtype=int)

    def fail(cols, kind, msg):
        for j in np.atleast_1d(cols):
            status[j] = kind
            messages[j] = msg
        alpha[cols] = np.nan
        beta[cols] = np.nan

    ybar = y.mean()
    if ybar == 0.0 or ybar == 1.0:
        fail(np.arange(p), "DegenerateInput", "outcome has a single class")
    else:
        const = np.ptp(X, axis=0) == 0.0
        fail(np.flatnonzero(const), "DegenerateInput", "predictor column is constant")
        sep = _separated(X, y) & ~const
        fail(np.flatnonzero(sep), "SeparationDetected",
             "classes are perfectly separated by the predictor")

    active = np.flatnonzero(status == OK)
    alpha[active] = logit(ybar) if active.size else np.nan
    beta[active] = 0.0
    yc = y[:, None]

    for it in range(opts.max_iter + 1):
        if active.size == 0:
            break
        a, b = alpha[active], beta[active]
        Xa = X[:, active]
        eta = a + Xa * b
        pi = expit(eta)
        r = yc - pi
        g0 = r.sum(axis=0)
        g1 = (Xa * r).sum(axis=0)

        done = np.maximum(np.abs(g0), np.abs(g1)) <= opts.tol
        converged[active[done]] = True
        iterations[active[done]] = it
        if it == opts.max_iter:
            left = active[~done]
            iterations[left] = it
            fail(left, "NoConvergence",
                 f"score did not fall below {opts.tol:g} in {opts.max_iter} iterations")
            break
        keep = ~done
        active, a, b, Xa, pi, g0, g1 = (
            active[keep], a[keep], b[keep], Xa[:, keep], pi[:, keep], g0[keep], g1[keep])
        if active.size == 0:
            break

        w = pi * (1.0 - pi)
        h00 = w.sum(axis=0)
        h01 = (w * Xa).sum(axis=0)
        h11 = (w * Xa * Xa).sum(axis=0)
        det = h00 * h11 - h01 * h01
        # Vanishing curvature means fitted probabilities have saturated.
        sing = ~(det > 1e-14 * h00 * h11)
        if sing.any():
            fail(active[sing], "SeparationDetected",
                 "information matrix became singular during iteration")
            good = ~sing
            active, a, b, Xa = active[good], a[good], b[good], Xa[:, good]
            g0, g1, h00, h01, h11, det = (
                g0[good], g1[good], h00[good], h01[good], h11[good], det[good])
        da = (h11 * g0 - h01 * g1) / det
        db = (h00 * g1 - h01 * g0) / det

        ll_old = log_likelihood(a, b, Xa, y)
        step = np.ones_like(da)
        na, nb = a + da, b + db
        ll_new = log_likelihood(na, nb, Xa, y)
        # Slack keeps rounding noise near the optimum from triggering halvings.
        floor = ll_old - 1e-12 * (1.0 + np.abs(ll_old))
        for _ in range(opts.max_halvings):
            worse = ll_new < floor
            if not worse.any():
                break
            step[worse] *= 0.5
            na[worse] = a[worse] + step[worse] * da[worse]
            nb[worse] = b[worse] + step[worse] * db[worse]
            ll_new[worse] = log_likelihood(na[worse], nb[worse], Xa[:, worse], y)
        alpha[active] = na
        beta[active] = nb

        blown = np.abs(nb) > opts.separation_bound
        if blown.any():
            fail(active[blown], "SeparationDetected",
                 f"|beta| exceeded {opts.separation_bound:g} before convergence")
            active = active[~blown]

    ok = status == OK
    pi_hat = np.full((n, p), np.nan)
    pi_hat[:, ok] = expit(alpha[ok] + X[:, ok] * beta[ok])
    ll = np.full(p, np.nan)
    ll[ok] = log_likelihood(alpha[ok], beta[ok], X[:, ok], y)
    return BatchFit(alpha, beta, pi_hat, converged, iterations, ll, status, messages)


def fit_logistic(x, y, opts: SolverOptions | None = None) -> MarginalFit:
    """Maximum-likelihood fit of a single-predictor logistic regression.

    Raises
    ------
    DegenerateInput
        ``x`` is constant or ``y`` contains one class only.
    SeparationDetected
        The classes are separated by ``x`` so the MLE does not exist.
    NoConvergence
        The score did not reach ``opts.tol`` within ``opts.max_iter`` steps.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DegenerateInput("x must be one-dimensional")
    return fit_logistic_batch(x[:, None], y, opts).column(0)


def averaged_information(X, pi):
    """Entries ``(I00, I01, I11)`` and determinant of the averaged information, per column."""
    w = pi * (1.0 - pi)
    i00 = w.mean(axis=0)
    i01 = (w * X).mean(axis=0)
    i11 = (w * X * X).mean(axis=0)
    return i00, i01, i11, i00 * i11 - i01 * i01


def information_singular(i00, i11, det) -> np.ndarray:
    return ~(det > 1e-12 * i00 * i11)


def score_matrix(X, y, pi) -> np.ndarray:
    """Standardized slope score contributions for all columns at once.

    Entry ``(i, j)`` is the slope coordinate of ``I_j^{-1} (1, x_ij)' (y_i - pi_ij)``
    with ``I_j`` the averaged observed information
    ``(1/n) sum_i pi_ij (1 - pi_ij) (1, x_ij)' (1, x_ij)``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    pi = np.asarray(pi, dtype=float)
    i00, i01, i11, det = averaged_information(X, pi)
    singular = information_singular(i00, i11, det)
    if singular.any():
        cols = np.flatnonzero(singular).tolist()
        raise SingularInformation(f"averaged Fisher information is singular for columns {cols}")
    return (i00 * X - i01) * (y[:, None] - pi) / det


def score_contributions(fit: MarginalFit, x, y) -> np.ndarray:
    """Length-``n`` vector of standardized slope score contributions of one fit."""
    if not fit.converged:
        raise NoConvergence("score contributions need a converged fit")
    x = np.asarray(x, dtype=float)
    return score_matrix(x[:, None], y, fit.pi_hat[:, None])[:, 0]
