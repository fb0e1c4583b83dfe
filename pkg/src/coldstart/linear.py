"""Regularized linear regression via cyclic coordinate descent.

One solver covers OLS, ridge, lasso, and elastic net through the objective

    (1/2n) ||y - b0 - X b||^2  +  alpha * l1_ratio * ||b||_1
                              +  (alpha * (1 - l1_ratio) / 2) * ||b||_2^2

with the intercept never regularized. The 1/(2n) scaling makes the lasso
shutdown threshold exactly max_j |X_j^T (y - ybar)| / n.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .trees import as_matrix


@dataclass
class LinearModel:
    coefficients: np.ndarray
    intercept: float
    alpha: float
    l1_ratio: float
    converged: bool
    n_iterations: int

    @property
    def n_features(self):
        return len(self.coefficients)


def soft_threshold(z, gamma):
    """sign(z) * max(|z| - gamma, 0)."""
    if gamma < 0:
        raise DataError("soft threshold needs gamma >= 0")
    if z > gamma:
        return z - gamma
    if z < -gamma:
        return z + gamma
    return 0.0


def objective(X, y, beta, intercept, alpha, l1_ratio):
    """The penalized least-squares objective minimized by fit_linear."""
    X = as_matrix(X)
    r = y - intercept - X @ beta
    return (
        float(r @ r) / (2 * len(y))
        + alpha * l1_ratio * float(np.sum(np.abs(beta)))
        + alpha * (1.0 - l1_ratio) / 2.0 * float(beta @ beta)
    )


def fit_linear(X, y, alpha, l1_ratio, tol=1e-6, max_iter=10000, sweep_callback=None):
    """Cyclic coordinate descent fit.

    Each sweep updates the intercept to the mean residual, then exactly
    minimizes the objective one coordinate at a time. Converged when the
    largest coefficient change in a sweep drops below ``tol``; hitting
    ``max_iter`` flags converged=False instead of raising.
    ``sweep_callback(beta, intercept)`` runs after every sweep (test hook).
    """
    X = as_matrix(X)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise DataError(f"misaligned shapes X={X.shape} y={y.shape}")
    if len(y) < 1:
        raise DataError("need at least one row")
    if tol <= 0:
        raise DataError("tol must be > 0")
    if alpha < 0:
        raise DataError("alpha must be >= 0")
    if not 0.0 <= l1_ratio <= 1.0:
        raise DataError("l1_ratio must be in [0, 1]")

    n, p = X.shape
    col_sq = (X * X).sum(axis=0) / n
    l1 = alpha * l1_ratio
    l2 = alpha * (1.0 - l1_ratio)

    beta = np.zeros(p)
    intercept = 0.0
    residual = y.copy()  # y - intercept - X @ beta, maintained incrementally

    converged = False
    sweeps = 0
    for sweeps in range(1, max_iter + 1):
        max_change = 0.0

        shift = float(residual.mean())
        intercept += shift
        residual -= shift
        max_change = abs(shift)

        for j in range(p):
            if col_sq[j] == 0.0:  # constant-zero column carries no signal
                continue
            old = beta[j]
            rho = float(X[:, j] @ residual) / n + col_sq[j] * old
            new = soft_threshold(rho, l1) / (col_sq[j] + l2)
            if new != old:
                residual -= X[:, j] * (new - old)
                beta[j] = new
                max_change = max(max_change, abs(new - old))

        if sweep_callback is not None:
            sweep_callback(beta.copy(), intercept)
        if max_change < tol:
            converged = True
            break

    return LinearModel(
        coefficients=beta,
        intercept=intercept,
        alpha=float(alpha),
        l1_ratio=float(l1_ratio),
        converged=converged,
        n_iterations=sweeps,
    )


def predict_linear(model, X):
    X = as_matrix(X)
    if X.shape[1] != model.n_features:
        raise DataError(
            f"linear model expects {model.n_features} features, got {X.shape[1]}"
        )
    return model.intercept + X @ model.coefficients


def kkt_residuals(model, X, y):
    """Stationarity residuals of a fitted model.

    Returns (zero_excess, active_residual):
      zero_excess    = max over beta_j == 0 of |g_j| - alpha*l1_ratio (or 0)
      active_residual = max over beta_j != 0 of |g_j + alpha*l1_ratio*sign(beta_j)|
    where g_j = -X_j^T (y - yhat)/n + alpha*(1-l1_ratio)*beta_j. Both are ~0
    at an exact optimum.
    """
    X = as_matrix(X)
    y = np.asarray(y, dtype=float)
    n = len(y)
    r = y - predict_linear(model, X)
    g = -(X.T @ r) / n + model.alpha * (1.0 - model.l1_ratio) * model.coefficients
    l1 = model.alpha * model.l1_ratio

    zero_excess = 0.0
    active_residual = 0.0
    for j, bj in enumerate(model.coefficients):
        if bj == 0.0:
            zero_excess = max(zero_excess, abs(g[j]) - l1)
        else:
            active_residual = max(active_residual, abs(g[j] + l1 * np.sign(bj)))
    return max(zero_excess, 0.0), active_residual


def linear_to_dict(model):
    return {
        "kind": "linear",
        "coefficients": [float(c) for c in model.coefficients],
        "intercept": model.intercept,
        "alpha": model.alpha,
        "l1_ratio": model.l1_ratio,
        "converged": model.converged,
        "n_iterations": model.n_iterations,
    }


def linear_from_dict(d):
    return LinearModel(
        coefficients=np.asarray(d["coefficients"], dtype=float),
        intercept=d["intercept"],
        alpha=d["alpha"],
        l1_ratio=d["l1_ratio"],
        converged=d["converged"],
        n_iterations=d["n_iterations"],
    )
