"""k-fold cross-validation and seeded randomized hyperparameter search.

Search candidates are drawn without replacement from the grid's cartesian
product; every evaluation seed derives deterministically from the search
seed, so identical inputs always reproduce the same candidate sequence,
fold scores, and winner. When handed a RawTable instead of a matrix, the
cross-validation runner fits the preprocessor inside each fold's training
complement so no statistics leak across folds.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from . import families, metrics
from .data import RawTable
from .errors import DataError
from .preprocess import fit_preprocessor, transform
from .trees import as_matrix
from .util import mix_seed


@dataclass
class FoldPlan:
    k: int
    assignments: np.ndarray  # row index -> fold id
    seed: int

    def test_indices(self, fold):
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold):
        return np.flatnonzero(self.assignments != fold)


@dataclass
class SearchResult:
    candidates: list  # dicts: params, fold_scores, mean_score
    best_index: int
    scoring: str
    seed: int

    @property
    def best_params(self):
        return self.candidates[self.best_index]["params"]

    @property
    def best_score(self):
        return self.candidates[self.best_index]["mean_score"]

    def to_dict(self):
        return {
            "candidates": [
                {
                    "params": c["params"],
                    "fold_scores": list(c["fold_scores"]),
                    "mean_score": c["mean_score"],
                }
                for c in self.candidates
            ],
            "best_index": self.best_index,
            "scoring": self.scoring,
            "seed": self.seed,
        }


def kfold_indices(n, k, seed):
    """Seeded shuffle then contiguous chunking; fold sizes differ by <= 1."""
    if k < 2:
        raise DataError(f"k must be >= 2, got {k}")
    if k > n:
        raise DataError(f"k={k} exceeds row count n={n}")
    order = np.random.default_rng(seed).permutation(n)
    assignments = np.empty(n, dtype=int)
    base, extra = divmod(n, k)
    start = 0
    for fold in range(k):
        size = base + (1 if fold < extra else 0)
        assignments[order[start : start + size]] = fold
        start += size
    return FoldPlan(k=k, assignments=assignments, seed=seed)


def score_predictions(scoring, y, yhat):
    if scoring == "r2":
        return metrics.r2(y, yhat)
    if scoring == "neg_mape":
        return -metrics.mape(y, yhat)
    raise DataError(f"unknown scoring {scoring!r}")


def cross_validate(family, params, X, y, plan, scoring, seed=0):
    """Per-fold scores for one candidate on an already-built feature matrix."""
    X = as_matrix(X)
    y = np.asarray(y, dtype=float)
    if len(y) != X.shape[0] or len(y) != len(plan.assignments):
        raise DataError("fold plan does not cover the data")
    scores = []
    for fold in range(plan.k):
        tr = plan.train_indices(fold)
        te = plan.test_indices(fold)
        if len(tr) == 0:
            raise DataError(f"fold {fold} has an empty training complement")
        model = families.fit_family(family, params, X[tr], y[tr], seed=mix_seed(seed, fold))
        yhat = families.predict_family(family, model, X[te])
        scores.append(score_predictions(scoring, y[te], yhat))
    return scores


def cross_validate_pipeline(
    family,
    params,
    table,
    y,
    plan,
    scoring,
    seed=0,
    numeric_strategy="median",
    categorical_strategy="mode",
):
    """Like cross_validate, but fits preprocessing inside each fold.

    Returns (scores, fold_preprocessors); the fitted per-fold preprocessors
    are exposed so leakage checks can inspect their statistics.
    """
    y = np.asarray(y, dtype=float)
    if table.n_rows != len(y) or len(y) != len(plan.assignments):
        raise DataError("fold plan does not cover the data")
    scores = []
    preprocessors = []
    for fold in range(plan.k):
        tr = plan.train_indices(fold).tolist()
        te = plan.test_indices(fold).tolist()
        if not tr:
            raise DataError(f"fold {fold} has an empty training complement")
        prep = fit_preprocessor(
            table.take_rows(tr),
            strategy_numeric=numeric_strategy,
            strategy_categorical=categorical_strategy,
        )
        X_tr = transform(prep, table.take_rows(tr))
        X_te = transform(prep, table.take_rows(te))
        model = families.fit_family(
            family, params, X_tr.values, y[tr], seed=mix_seed(seed, fold)
        )
        yhat = families.predict_family(family, model, X_te.values)
        scores.append(score_predictions(scoring, y[te], yhat))
        preprocessors.append(prep)
    return scores, preprocessors


def enumerate_grid(grid):
    """Cartesian product of a param grid, in deterministic order."""
    if not grid:
        raise DataError("empty parameter grid")
    names = sorted(grid)
    for name in names:
        if not grid[name]:
            raise DataError(f"grid entry {name!r} has no candidate values")
    combos = []
    for values in itertools.product(*(grid[name] for name in names)):
        combos.append(dict(zip(names, values)))
    return combos


def randomized_search(
    family,
    grid,
    n_iter,
    X,
    y,
    k,
    seed,
    scoring=None,
    numeric_strategy="median",
    categorical_strategy="mode",
):
    """Sample up to n_iter distinct grid assignments and rank them by CV score.

    Accepts either a numeric matrix or a RawTable; the table path runs the
    leak-free per-fold preprocessing pipeline. Ties in mean score go to the
    earliest sampled candidate.
    """
    if n_iter < 1:
        raise DataError("n_iter must be >= 1")
    families.check_family(family)
    if scoring is None:
        scoring = families.DEFAULT_SCORING[family]

    combos = enumerate_grid(grid)
    m = min(n_iter, len(combos))
    order = np.random.default_rng(seed).permutation(len(combos))[:m]

    n = X.n_rows if isinstance(X, RawTable) else as_matrix(X).shape[0]
    plan = kfold_indices(n, k, seed)

    candidates = []
    for i, combo_idx in enumerate(order):
        params = combos[int(combo_idx)]
        if isinstance(X, RawTable):
            fold_scores, _ = cross_validate_pipeline(
                family,
                params,
                X,
                y,
                plan,
                scoring,
                seed=mix_seed(seed, i),
                numeric_strategy=numeric_strategy,
                categorical_strategy=categorical_strategy,
            )
        else:
            fold_scores = cross_validate(
                family, params, X, y, plan, scoring, seed=mix_seed(seed, i)
            )
        candidates.append(
            {
                "params": params,
                "fold_scores": [float(s) for s in fold_scores],
                "mean_score": float(np.mean(fold_scores)),
            }
        )

    best_index = 0
    for i, c in enumerate(candidates):
        if c["mean_score"] > candidates[best_index]["mean_score"]:
            best_index = i
    return SearchResult(candidates=candidates, best_index=best_index, scoring=scoring, seed=seed)
