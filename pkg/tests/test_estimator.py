import doctest

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.linear_model import LogisticRegression
from sklearn.pipeline import Pipeline

import logitpfa.estimator
from logitpfa import LogitPFA
from logitpfa.exceptions import DegenerateInput, SeparationDetected, TooFewColumns
from logitpfa.pfa import estimate_fdp, fdp_over_grid, log_grid


def make_data(seed=0, n=300, p=30, signals=3, strength=1.5):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    eta = strength * X[:, :signals].sum(axis=1)
    y = (rng.random(n) < 1 / (1 + np.exp(-eta))).astype(int)
    return X, y


@pytest.fixture(scope="module")
def fitted():
    X, y = make_data()
    return LogitPFA(n_factors=2).fit(X, y), X, y


def test_default_params_roundtrip():
    est = LogitPFA()
    params = est.get_params()
    assert params["alpha"] == 0.05
    assert params["n_factors"] is None
    assert params["factor_method"] == "l1"
    assert params["grid_points"] == 400
    est.set_params(alpha=0.1, factor_method="l2")
    assert est.alpha == 0.1 and est.factor_method == "l2"
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    assert twin is not est


def test_fitted_attributes_are_aligned(fitted):
    est, X, _ = fitted
    p = est.columns_.size
    assert est.n_features_in_ == X.shape[1]
    for name in ("coef_", "intercept_", "z_", "pvalues_", "adjusted_pvalues_", "rejected_"):
        assert getattr(est, name).shape == (p,)
    assert est.correlation_.shape == est.covariance_.shape == (p, p)
    np.testing.assert_array_equal(np.diag(est.correlation_), 1.0)
    assert est.n_factors_ == 2
    assert 0 < est.explained_variance_ratio_ < 1
    assert len(est.fdp_curve_) == 400


def test_rejections_follow_adjusted_pvalues(fitted):
    est, _, _ = fitted
    assert est.threshold_found_
    np.testing.assert_array_equal(est.rejected_, est.adjusted_pvalues_ <= est.threshold_)
    assert est.rejected_[:3].all()
    mask = est.get_support()
    np.testing.assert_array_equal(np.flatnonzero(mask), est.columns_[est.rejected_])


def test_threshold_is_largest_grid_point_at_level(fitted):
    est, _, _ = fitted
    ok = [rep.t for rep in est.fdp_curve_ if rep.fdp_hat <= est.alpha]
    assert est.threshold_ == max(ok)


def test_fdp_methods_delegate(fitted):
    est, _, _ = fitted
    zv = est._zvector()
    rep = est.estimate_fdp(1e-3)
    assert rep == estimate_fdp(zv, est.factor_model_, est.factor_estimate_, 1e-3)
    grid = log_grid(1e-5, 1, 7)
    assert est.fdp_curve(grid) == fdp_over_grid(zv, est.factor_model_, est.factor_estimate_, grid)
    assert est.count_rejections(1.0) == est.columns_.size


def test_transform_in_pipeline():
    X, y = make_data(1)
    pipe = Pipeline([("select", LogitPFA(n_factors=2)), ("clf", LogisticRegression())])
    pipe.fit(X, y)
    kept = pipe.named_steps["select"].get_support().sum()
    assert kept >= 1
    assert pipe.named_steps["select"].transform(X).shape == (X.shape[0], kept)
    assert pipe.predict(X).shape == (X.shape[0],)


def test_failed_columns_are_dropped():
    X, y = make_data(2, p=12)
    X[:, 4] = 3.0
    X[:, 7] = np.where(y == 1, 1.0, -1.0)
    est = LogitPFA(n_factors=1).fit(X, y)
    assert est.dropped_ == {4: "DegenerateInput", 7: "SeparationDetected"}
    assert est.columns_.tolist() == [j for j in range(12) if j not in (4, 7)]
    assert not est.get_support()[[4, 7]].any()
    assert len(est.dropped_) + est.columns_.size == X.shape[1]


def test_drop_failed_false_raises_first_failure():
    X, y = make_data(3, p=6)
    X[:, 2] = np.where(y == 1, 1.0, -1.0)
    X[:, 4] = 0.0
    with pytest.raises(SeparationDetected):
        LogitPFA(n_factors=1, drop_failed=False).fit(X, y)


def test_too_few_columns():
    X, y = make_data(4, p=3)
    X[:, 1:] = 1.0
    with pytest.raises(TooFewColumns):
        LogitPFA().fit(X, y)


def test_non_binary_outcome():
    X, y = make_data(5, p=4)
    y = y.astype(float)
    y[0] = 0.5
    with pytest.raises(DegenerateInput):
        LogitPFA().fit(X, y)


@pytest.mark.parametrize("params", [
    {"alpha": 0.0}, {"alpha": 1.5}, {"factor_method": "l3"}, {"n_factors": 0},
    {"epsilon": 1.0}, {"grid_points": 0},
])
def test_invalid_params(params):
    X, y = make_data(6, p=4)
    with pytest.raises(ValueError):
        LogitPFA(**params).fit(X, y)


def test_too_many_factors():
    X, y = make_data(7, p=4)
    with pytest.raises(ValueError, match="n_factors"):
        LogitPFA(n_factors=5).fit(X, y)


def test_no_threshold_means_no_rejections():
    X, y = make_data(8)
    # a single grid point at t = 1 has FDP_hat = 1
    est = LogitPFA(n_factors=2, grid_min=1.0, grid_points=1).fit(X, y)
    assert est.fdp_curve_[0].fdp_hat == 1.0
    assert not est.threshold_found_
    assert not est.rejected_.any()
    assert est.get_support().sum() == 0


def test_epsilon_rule_selects_k():
    X, y = make_data(9)
    est = LogitPFA(epsilon=0.5, factor_method="l2").fit(X, y)
    lam = est.eigenvalues_
    k = est.n_factors_
    assert np.sqrt(np.sum(lam[k:] ** 2)) / lam.sum() < 0.5
    if k > 1:
        assert np.sqrt(np.sum(lam[k - 1:] ** 2)) / lam.sum() >= 0.5


def test_refit_is_deterministic():
    X, y = make_data(10)
    a = LogitPFA(n_factors=3).fit(X, y)
    b = LogitPFA(n_factors=3).fit(X, y)
    np.testing.assert_array_equal(a.adjusted_pvalues_, b.adjusted_pvalues_)
    assert a.threshold_ == b.threshold_


def test_docstring_example():
    result = doctest.testmod(logitpfa.estimator, verbose=False)
    assert result.attempted > 0 and result.failed == 0
