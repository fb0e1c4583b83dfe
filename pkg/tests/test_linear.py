import numpy as np
import pytest

from coldstart.errors import DataError
from coldstart.linear import (
    fit_linear,
    kkt_residuals,
    linear_from_dict,
    linear_to_dict,
    objective,
    predict_linear,
    soft_threshold,
)


def standardize(X):
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd[sd == 0] = 1.0
    return (X - mu) / sd


def ridge_closed_form(X, y, alpha):
    """Independent oracle on standardized X: solve (X'X/n + aI) b = X'(y-ybar)/n."""
    n, p = X.shape
    beta = np.linalg.solve(X.T @ X / n + alpha * np.eye(p), X.T @ (y - y.mean()) / n)
    return beta, float(y.mean())


def test_soft_threshold_cases():
    assert soft_threshold(3.0, 1.0) == 2.0
    assert soft_threshold(-0.5, 1.0) == 0.0
    assert soft_threshold(-3.0, 1.0) == -2.0
    for z in np.linspace(-4, 4, 17):
        assert soft_threshold(z, 0.0) == z
    with pytest.raises(DataError):
        soft_threshold(1.0, -0.1)


def test_noiseless_ols():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = 2.0 * X[:, 0] + 1.0
    model = fit_linear(X, y, alpha=0.0, l1_ratio=1.0, tol=1e-10)
    assert model.converged
    assert abs(model.coefficients[0] - 2.0) < 1e-8
    assert abs(model.intercept - 1.0) < 1e-8


def test_lasso_shutdown_threshold():
    rng = np.random.default_rng(0)
    X = standardize(rng.normal(size=(40, 5)))
    y = rng.normal(size=40) * 3.0 + 10.0
    threshold = float(np.max(np.abs(X.T @ (y - y.mean()))) / len(y))
    model = fit_linear(X, y, alpha=threshold * 1.000001, l1_ratio=1.0)
    assert np.all(model.coefficients == 0.0)
    assert abs(model.intercept - y.mean()) < 1e-12
    # just below the threshold at least one coefficient activates
    model2 = fit_linear(X, y, alpha=threshold * 0.99, l1_ratio=1.0)
    assert np.any(model2.coefficients != 0.0)


def test_ridge_matches_closed_form():
    rng = np.random.default_rng(1)
    X = standardize(rng.normal(size=(6, 3)))
    y = rng.normal(size=6)
    for alpha in (0.01, 0.5, 3.0):
        model = fit_linear(X, y, alpha=alpha, l1_ratio=0.0, tol=1e-12, max_iter=100000)
        beta, intercept = ridge_closed_form(X, y, alpha)
        assert np.max(np.abs(model.coefficients - beta)) < 1e-6
        assert abs(model.intercept - intercept) < 1e-6


def test_ols_matches_normal_equations_any_l1_ratio():
    rng = np.random.default_rng(2)
    X = standardize(rng.normal(size=(30, 4)))
    y = X @ np.array([1.5, -2.0, 0.0, 0.7]) + rng.normal(scale=0.1, size=30)
    oracle, intercept = ridge_closed_form(X, y, 0.0)
    for l1_ratio in (0.0, 0.5, 1.0):
        model = fit_linear(X, y, alpha=0.0, l1_ratio=l1_ratio, tol=1e-12, max_iter=100000)
        assert np.max(np.abs(model.coefficients - oracle)) < 1e-6
        assert abs(model.intercept - intercept) < 1e-6


def test_kkt_conditions_on_lasso_and_enet():
    rng = np.random.default_rng(3)
    tol = 1e-8
    for trial in range(20):
        n, p = 30, 6
        X = standardize(rng.normal(size=(n, p)))
        beta_true = rng.normal(size=p) * (rng.random(p) < 0.5)
        y = X @ beta_true + rng.normal(scale=0.5, size=n)
        alpha = float(rng.choice([0.01, 0.1, 1.0]))
        l1_ratio = float(rng.choice([0.5, 1.0]))
        model = fit_linear(X, y, alpha=alpha, l1_ratio=l1_ratio, tol=tol, max_iter=50000)
        assert model.converged
        zero_excess, active_residual = kkt_residuals(model, X, y)
        assert zero_excess <= 10 * tol
        assert active_residual <= 10 * tol


def test_objective_non_increasing_per_sweep():
    rng = np.random.default_rng(4)
    X = standardize(rng.normal(size=(50, 5)))
    y = rng.normal(size=50)
    seen = []

    def record(beta, intercept):
        seen.append(objective(X, y, beta, intercept, 0.3, 0.7))

    fit_linear(X, y, alpha=0.3, l1_ratio=0.7, tol=1e-10, sweep_callback=record)
    for a, b in zip(seen, seen[1:]):
        assert b <= a + 1e-12


def test_ridge_norm_shrinks_with_alpha():
    rng = np.random.default_rng(5)
    X = standardize(rng.normal(size=(40, 4)))
    y = X @ np.array([2.0, -1.0, 0.5, 1.0]) + rng.normal(scale=0.2, size=40)
    norms = []
    for alpha in (0.0, 0.1, 1.0, 10.0, 100.0):
        model = fit_linear(X, y, alpha=alpha, l1_ratio=0.0, tol=1e-10)
        norms.append(float(np.linalg.norm(model.coefficients)))
    for a, b in zip(norms, norms[1:]):
        assert b <= a + 1e-9


def test_max_iter_flags_not_raises():
    rng = np.random.default_rng(6)
    X = standardize(rng.normal(size=(30, 3)))
    y = rng.normal(size=30)
    model = fit_linear(X, y, alpha=0.0, l1_ratio=0.0, tol=1e-14, max_iter=2)
    assert model.converged is False
    assert model.n_iterations == 2


def test_predict_cases():
    model = fit_linear(np.array([[1.0], [2.0]]), np.array([3.0, 3.0]), alpha=0.0, l1_ratio=0.0)
    assert np.allclose(predict_linear(model, np.array([[5.0]])), 3.0)

    hand = linear_from_dict(
        {
            "kind": "linear",
            "coefficients": [1.0, 1.0],
            "intercept": 0.0,
            "alpha": 0.0,
            "l1_ratio": 0.0,
            "converged": True,
            "n_iterations": 1,
        }
    )
    assert predict_linear(hand, np.array([[2.0, 3.0]]))[0] == 5.0
    with pytest.raises(DataError):
        predict_linear(hand, np.array([[1.0]]))


def test_noiseless_fit_reproduces_training_targets():
    rng = np.random.default_rng(7)
    X = standardize(rng.normal(size=(25, 3)))
    y = X @ np.array([1.0, -2.0, 0.5]) + 4.0
    model = fit_linear(X, y, alpha=0.0, l1_ratio=1.0, tol=1e-12, max_iter=100000)
    assert np.max(np.abs(predict_linear(model, X) - y)) < 1e-6


def test_validation_errors():
    X = np.ones((3, 1))
    with pytest.raises(DataError):
        fit_linear(X, np.ones(2), alpha=0.0, l1_ratio=0.0)
    with pytest.raises(DataError):
        fit_linear(X, np.ones(3), alpha=0.0, l1_ratio=0.0, tol=0.0)
    with pytest.raises(DataError):
        fit_linear(X, np.ones(3), alpha=-1.0, l1_ratio=0.0)
    with pytest.raises(DataError):
        fit_linear(X, np.ones(3), alpha=1.0, l1_ratio=1.5)


def test_serialization_round_trip():
    rng = np.random.default_rng(8)
    X = standardize(rng.normal(size=(20, 4)))
    y = rng.normal(size=20)
    model = fit_linear(X, y, alpha=0.1, l1_ratio=0.5)
    clone = linear_from_dict(linear_to_dict(model))
    assert np.array_equal(predict_linear(model, X), predict_linear(clone, X))
    assert clone.alpha == model.alpha and clone.l1_ratio == model.l1_ratio
