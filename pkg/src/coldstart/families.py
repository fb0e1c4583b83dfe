"""Registry mapping the six model family names onto fit/predict/serialize.

Families: decision_tree, random_forest, gbt (squared-error gradient
boosting), lasso, ridge, elastic_net. Forest defaults pin the documented
production configuration (1000 trees, min split 30, depth 30); gbt defaults
pin learning rate 0.5.
"""

from dataclasses import dataclass

from . import linear, trees
from .errors import DataError

FAMILIES = ("decision_tree", "random_forest", "gbt", "lasso", "ridge", "elastic_net")

LINEAR_FAMILIES = ("lasso", "ridge", "elastic_net")

L1_RATIO_BY_FAMILY = {"lasso": 1.0, "ridge": 0.0, "elastic_net": 0.5}

DEFAULT_PARAMS = {
    "decision_tree": {"max_depth": None, "min_samples_split": 30},
    "random_forest": {"n_estimators": 1000, "min_samples_split": 30, "max_depth": 30},
    "gbt": {"rounds": 100, "max_depth": 3, "learning_rate": 0.5, "min_samples_split": 2},
    "lasso": {"alpha": 1.0},
    "ridge": {"alpha": 1.0},
    "elastic_net": {"alpha": 1.0, "l1_ratio": 0.5},
}

_ALPHAS = [0.001, 0.01, 0.1, 1.0, 10.0, 100.0]

DEFAULT_GRIDS = {
    "gbt": {"rounds": [50, 100, 200], "max_depth": [2, 3, 4], "learning_rate": [0.1, 0.3, 0.5]},
    "random_forest": {
        "n_estimators": [200, 500, 1000],
        "min_samples_split": [2, 10, 30],
        "max_depth": [10, 30, None],
    },
    "decision_tree": {"max_depth": [3, 5, 10, None], "min_samples_split": [2, 10, 30]},
    "lasso": {"alpha": list(_ALPHAS)},
    "ridge": {"alpha": list(_ALPHAS)},
    "elastic_net": {"alpha": list(_ALPHAS)},
}

# the documented search scores the linear models by R-squared; the tree
# families are judged by the error metric the evaluation reports
DEFAULT_SCORING = {
    "decision_tree": "neg_mape",
    "random_forest": "neg_mape",
    "gbt": "neg_mape",
    "lasso": "r2",
    "ridge": "r2",
    "elastic_net": "r2",
}


def check_family(family):
    if family not in FAMILIES:
        raise DataError(f"unknown model family {family!r}; expected one of {FAMILIES}")


def resolve_params(family, params=None):
    check_family(family)
    merged = dict(DEFAULT_PARAMS[family])
    merged.update(params or {})
    return merged


def fit_family(family, params, X, y, seed=0):
    """Fit one model of the given family; params override family defaults."""
    p = resolve_params(family, params)
    if family == "decision_tree":
        tp = trees.TreeParams(
            max_depth=p["max_depth"],
            min_samples_split=p["min_samples_split"],
            max_features=p.get("max_features", "all"),
            seed=seed,
        )
        return trees.fit_decision_tree(X, y, tp)
    if family == "random_forest":
        tp = trees.TreeParams(
            max_depth=p["max_depth"],
            min_samples_split=p["min_samples_split"],
            max_features=p.get("max_features", "third"),
            seed=seed,
        )
        return trees.fit_random_forest(X, y, tp, n_estimators=p["n_estimators"])
    if family == "gbt":
        tp = trees.TreeParams(
            max_depth=p["max_depth"],
            min_samples_split=p["min_samples_split"],
            max_features=p.get("max_features", "all"),
            seed=seed,
        )
        return trees.fit_gbt(X, y, rounds=p["rounds"], learning_rate=p["learning_rate"], tree_params=tp)
    # linear families
    return linear.fit_linear(
        X,
        y,
        alpha=p["alpha"],
        l1_ratio=p.get("l1_ratio", L1_RATIO_BY_FAMILY[family]),
        tol=p.get("tol", 1e-6),
        max_iter=p.get("max_iter", 10000),
    )


def predict_family(family, model, X):
    check_family(family)
    if family in LINEAR_FAMILIES:
        return linear.predict_linear(model, X)
    return trees.predict_tree_family(model, X)


def model_to_dict(family, model):
    check_family(family)
    if family in LINEAR_FAMILIES:
        return linear.linear_to_dict(model)
    if family == "decision_tree":
        return {"kind": "tree", "root": trees.tree_to_dict(model)}
    if family == "random_forest":
        return trees.forest_to_dict(model)
    return trees.gbt_to_dict(model)


def model_from_dict(family, d):
    check_family(family)
    if family in LINEAR_FAMILIES:
        return linear.linear_from_dict(d)
    if family == "decision_tree":
        return trees.tree_from_dict(d["root"])
    if family == "random_forest":
        return trees.forest_from_dict(d)
    return trees.gbt_from_dict(d)


@dataclass
class FittedModel:
    """A fitted model plus enough context to predict and serialize it."""

    family: str
    params: dict
    model: object

    def predict(self, X):
        return predict_family(self.family, self.model, X)

    def to_dict(self):
        return {
            "family": self.family,
            "params": {k: v for k, v in self.params.items()},
            "model": model_to_dict(self.family, self.model),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            family=d["family"],
            params=dict(d["params"]),
            model=model_from_dict(d["family"], d["model"]),
        )
