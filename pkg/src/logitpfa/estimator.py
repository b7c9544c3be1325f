"""scikit-learn style front end for the marginal-logit PFA procedure."""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils._param_validation import Interval, StrOptions
from sklearn.utils.validation import check_is_fitted, validate_data

from . import glm_marginal, mmm, pfa
from ._validation import check_binary_outcome
from .exceptions import TooFewColumns


class LogitPFA(SelectorMixin, BaseEstimator):
    """Select predictors associated with a binary outcome under FDP control.

    Each column of ``X`` is regressed marginally on ``y`` by logistic
    regression. The joint covariance of the slope estimates is obtained from
    the stacked score contributions, and the correlation among the resulting
    Z-statistics is captured by ``n_factors`` principal factors. The false
    discovery proportion of thresholding at ``t`` is then estimated for every
    ``t`` on a log grid, and the largest ``t`` whose estimate stays at or below
    ``alpha`` is used to threshold the factor-adjusted p-values.

    Parameters
    ----------
    alpha : float, default=0.05
        Target level for the estimated FDP.
    n_factors : int or None, default=None
        Number of principal factors. When None it is the smallest ``k``
        whose discarded spectrum falls below ``epsilon``.
    epsilon : float, default=0.01
        Relative Frobenius tolerance used when ``n_factors`` is None.
    factor_method : {"l1", "l2"}, default="l1"
        How the realized factors are estimated from the Z-vector: least
        absolute deviations over all coordinates, or least squares over the
        90% smallest ``|z_j|``.
    grid_min, grid_max, grid_points
        Log-spaced threshold grid searched for the data-driven threshold.
    drop_failed : bool, default=True
        Exclude columns whose marginal fit fails (reported in ``dropped_``).
        When False the first failure is raised.
    tol, max_iter, separation_bound
        Newton-Raphson settings for the marginal fits.

    Attributes
    ----------
    columns_ : ndarray of int
        Input column indices that were analyzed, in input order. All per-
        hypothesis attributes below are aligned with it.
    dropped_ : dict[int, str]
        Input column index to the error class that excluded it.
    coef_, intercept_ : ndarray
        Marginal slopes and intercepts.
    z_, pvalues_, adjusted_pvalues_ : ndarray
    covariance_, correlation_ : ndarray
    eigenvalues_ : ndarray
        Spectrum of ``correlation_``, descending.
    n_factors_ : int
    factor_model_ : FactorModel
    factor_estimate_ : FactorEstimate
    fdp_curve_ : list of FdpReport
        Estimates over the threshold grid.
    threshold_ : float
        Data-driven threshold; ``threshold_found_`` is False when no grid
        point reaches ``alpha``, in which case nothing is rejected.
    rejected_ : ndarray of bool

    Examples
    --------
    >>> import numpy as np
    >>> rng = np.random.default_rng(0)
    >>> X = rng.standard_normal((300, 40))
    >>> y = (rng.random(300) < 1 / (1 + np.exp(-2 * X[:, 0]))).astype(int)
    >>> sel = LogitPFA(n_factors=2).fit(X, y)
    >>> bool(sel.get_support()[0])
    True
    """

    _parameter_constraints: dict = {
        "alpha": [Interval(numbers.Real, 0, 1, closed="right")],
        "n_factors": [Interval(numbers.Integral, 1, None, closed="left"), None],
        "epsilon": [Interval(numbers.Real, 0, 1, closed="neither")],
        "factor_method": [StrOptions({"l1", "l2"})],
        "grid_min": [Interval(numbers.Real, 0, 1, closed="right")],
        "grid_max": [Interval(numbers.Real, 0, 1, closed="right")],
        "grid_points": [Interval(numbers.Integral, 1, None, closed="left")],
        "drop_failed": ["boolean"],
        "tol": [Interval(numbers.Real, 0, None, closed="neither")],
        "max_iter": [Interval(numbers.Integral, 1, None, closed="left")],
        "separation_bound": [Interval(numbers.Real, 0, None, closed="neither")],
    }

    def __init__(
        self,
        alpha=0.05,
        n_factors=None,
        epsilon=0.01,
        factor_method="l1",
        grid_min=1e-12,
        grid_max=1.0,
        grid_points=400,
        drop_failed=True,
        tol=1e-8,
        max_iter=50,
        separation_bound=1e3,
    ):
        self.alpha = alpha
        self.n_factors = n_factors
        self.epsilon = epsilon
        self.factor_method = factor_method
        self.grid_min = grid_min
        self.grid_max = grid_max
        self.grid_points = grid_points
        self.drop_failed = drop_failed
        self.tol = tol
        self.max_iter = max_iter
        self.separation_bound = separation_bound

    def fit(self, X, y):
        self._validate_params()
        X, y = validate_data(self, X, y, dtype=np.float64, ensure_min_samples=2,
                             y_numeric=True)
        y = check_binary_outcome(y, X.shape[0])
        opts = glm_marginal.SolverOptions(self.tol, self.max_iter, self.separation_bound)

        batch = glm_marginal.fit_logistic_batch(X, y, opts)
        ok = batch.ok.copy()
        i00, _, i11, det = glm_marginal.averaged_information(X[:, ok], batch.pi[:, ok])
        singular = np.zeros_like(ok)
        singular[np.flatnonzero(ok)[glm_marginal.information_singular(i00, i11, det)]] = True

        dropped = {int(j): str(batch.status[j]) for j in np.flatnonzero(~ok)}
        for j in np.flatnonzero(singular):
            dropped[int(j)] = "SingularInformation"
        ok &= ~singular
        if dropped and not self.drop_failed:
            j = min(dropped)
            if dropped[j] == "SingularInformation":
                glm_marginal.score_matrix(X[:, [j]], y, batch.pi[:, [j]])
            batch.column(j)
        cols = np.flatnonzero(ok)
        if cols.size < 2:
            raise TooFewColumns(f"only {cols.size} column(s) could be fitted; need at least 2")

        psi = glm_marginal.score_matrix(X[:, cols], y, batch.pi[:, cols])
        cov = mmm.estimate_covariance(mmm.ScoreMatrix(psi, cols))
        corr = mmm.to_correlation(cov)
        zv = mmm.z_statistics(batch.beta[cols], cov)

        eig = pfa.spectral_decompose(corr)
        if self.n_factors is None:
            k = pfa.select_num_factors(eig.eigenvalues, self.epsilon)
        else:
            k = self.n_factors
            if k > cols.size:
                raise ValueError(f"n_factors={k} exceeds the {cols.size} analyzed columns")
        model = pfa.build_factor_model(eig, k)
        west = pfa.estimate_factors(zv, model, self.factor_method)

        grid = pfa.log_grid(self.grid_min, self.grid_max, self.grid_points)
        curve = pfa.fdp_over_grid(zv, model, west, grid)
        thr = pfa.threshold_from_reports(curve, self.alpha)
        adjusted = pfa.adjusted_pvalues(zv, model, west)

        self.columns_ = cols
        self.dropped_ = dict(sorted(dropped.items()))
        self.coef_ = batch.beta[cols]
        self.intercept_ = batch.alpha[cols]
        self.n_iter_ = batch.iterations[cols]
        self.covariance_ = cov.sigma
        self.correlation_ = corr
        self.z_ = zv.z
        self.pvalues_ = zv.p_values
        self.eigenvalues_ = eig.eigenvalues
        self.n_factors_ = k
        self.factor_model_ = model
        self.factor_estimate_ = west
        self.fdp_curve_ = curve
        self.threshold_ = thr.t
        self.threshold_found_ = thr.found
        self.adjusted_pvalues_ = adjusted
        self.rejected_ = (adjusted <= thr.t) if thr.found else np.zeros(cols.size, dtype=bool)
        return self

    @property
    def explained_variance_ratio_(self) -> float:
        """Share of the correlation spectrum carried by the retained factors."""
        check_is_fitted(self)
        lam = self.eigenvalues_
        return float(lam[: self.n_factors_].sum() / lam.sum())

    def _zvector(self):
        return mmm.ZVector(self.z_, self.pvalues_)

    def estimate_fdp(self, t: float) -> pfa.FdpReport:
        """Estimated FDP of rejecting every unadjusted p-value ``<= t``."""
        check_is_fitted(self)
        return pfa.estimate_fdp(self._zvector(), self.factor_model_, self.factor_estimate_, t)

    def fdp_curve(self, grid=None) -> list[pfa.FdpReport]:
        check_is_fitted(self)
        if grid is None:
            return list(self.fdp_curve_)
        return pfa.fdp_over_grid(self._zvector(), self.factor_model_, self.factor_estimate_, grid)

    def count_rejections(self, t: float) -> int:
        check_is_fitted(self)
        return pfa.count_rejections(self._zvector(), t)

    def _get_support_mask(self):
        check_is_fitted(self)
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.columns_[self.rejected_]] = True
        return mask
