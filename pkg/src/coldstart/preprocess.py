"""Fit/transform preprocessing: imputation, standardization, one-hot encoding.

Fit learns per-column state from a raw feature table; transform applies it
to any table with the same schema, producing a fully numeric FeatureMatrix.
Unknown categories at transform time encode as the all-zero vector so new
shows with unseen metadata keep a stable feature dimension.
"""

from dataclasses import dataclass, field

import numpy as np

from .data import FeatureMatrix, RawTable
from .errors import DataError, SchemaError

SENTINEL = "__missing__"


@dataclass
class NumericColumnState:
    name: str
    impute_value: float
    mean: float
    std: float  # population std (divisor n), computed after imputation


@dataclass
class CategoricalColumnState:
    name: str
    impute_category: str
    categories: list  # deduplicated, lexicographic


@dataclass
class Preprocessor:
    numeric: list
    categorical: list
    passthrough: list  # column names copied verbatim
    schema: list = field(default_factory=list)  # fit-time (name, role) pairs
    strategy_numeric: str = "median"
    strategy_categorical: str = "mode"
    fitted: bool = True

    @property
    def feature_names(self):
        names = [c.name for c in self.numeric]
        for col in self.categorical:
            names.extend(f"{col.name}={cat}" for cat in col.categories)
        names.extend(self.passthrough)
        return names


def _mode(values):
    counts = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    best = max(counts.values())
    return min(v for v, c in counts.items() if c == best)  # ties: lexicographic


def fit_preprocessor(features, strategy_numeric="median", strategy_categorical="mode"):
    """Learn imputation + scaling + one-hot state from a raw feature table."""
    if strategy_numeric not in ("mean", "median"):
        raise DataError(f"unknown numeric strategy {strategy_numeric!r}")
    if strategy_categorical not in ("mode", "sentinel"):
        raise DataError(f"unknown categorical strategy {strategy_categorical!r}")
    if features.n_rows == 0:
        raise DataError("cannot fit preprocessor on an empty table")

    numeric = []
    categorical = []
    passthrough = []
    for schema in features.schemas:
        cells = features.column(schema.name)
        if schema.role == "numeric":
            present = np.asarray([v for v in cells if v is not None], dtype=float)
            if len(present) == 0:
                raise DataError(f"numeric column {schema.name!r} is entirely missing")
            if strategy_numeric == "mean":
                impute = float(present.mean())
            else:
                impute = float(np.median(present))
            filled = np.asarray([impute if v is None else float(v) for v in cells])
            numeric.append(
                NumericColumnState(
                    name=schema.name,
                    impute_value=impute,
                    mean=float(filled.mean()),
                    std=float(filled.std()),  # population (divisor n)
                )
            )
        elif schema.role == "categorical":
            present = [str(v) for v in cells if v is not None]
            categories = sorted(set(present))
            if strategy_categorical == "mode":
                if not present:
                    raise DataError(f"categorical column {schema.name!r} is entirely missing")
                impute = _mode(present)
            else:
                impute = SENTINEL
                categories = sorted(set(categories) | {SENTINEL})
            categorical.append(
                CategoricalColumnState(
                    name=schema.name, impute_category=impute, categories=categories
                )
            )
        elif schema.role == "passthrough":
            passthrough.append(schema.name)
        elif schema.role == "date":
            raise SchemaError(
                f"date column {schema.name!r}: derive date features before preprocessing"
            )
        else:
            raise SchemaError(f"column {schema.name!r} with role {schema.role!r} "
                              "does not belong in a feature table")

    return Preprocessor(
        numeric=numeric,
        categorical=categorical,
        passthrough=passthrough,
        schema=[(s.name, s.role) for s in features.schemas],
        strategy_numeric=strategy_numeric,
        strategy_categorical=strategy_categorical,
    )


def transform(preprocessor, features):
    """Apply a fitted preprocessor; returns a FeatureMatrix.

    Column order: scaled numerics in schema order, then one-hot blocks in
    schema order, then passthroughs.
    """
    if not preprocessor.fitted:
        raise DataError("preprocessor is not fitted")
    if not isinstance(features, RawTable):
        raise SchemaError("transform expects a RawTable")
    got = [(s.name, s.role) for s in features.schemas]
    if got != preprocessor.schema:
        raise SchemaError(
            f"schema mismatch: fitted on {preprocessor.schema}, got {got}"
        )

    n = features.n_rows
    blocks = []
    names = []

    for col in preprocessor.numeric:
        cells = features.column(col.name)
        filled = np.asarray(
            [col.impute_value if v is None else float(v) for v in cells]
        )
        divisor = col.std if col.std > 0 else 1.0
        blocks.append(((filled - col.mean) / divisor).reshape(n, 1))
        names.append(col.name)

    for col in preprocessor.categorical:
        cells = features.column(col.name)
        block = np.zeros((n, len(col.categories)))
        index = {cat: j for j, cat in enumerate(col.categories)}
        for i, v in enumerate(cells):
            v = col.impute_category if v is None else str(v)
            j = index.get(v)
            if j is not None:  # unknown categories stay all-zero
                block[i, j] = 1.0
        blocks.append(block)
        names.extend(f"{col.name}={cat}" for cat in col.categories)

    for name in preprocessor.passthrough:
        cells = features.column(name)
        out = np.empty(n)
        for i, v in enumerate(cells):
            if v is None:
                raise DataError(f"missing value in passthrough column {name!r} (row {i})")
            out[i] = float(v)
        blocks.append(out.reshape(n, 1))
        names.append(name)

    if blocks:
        values = np.hstack(blocks)
    else:
        values = np.zeros((n, 0))
    return FeatureMatrix(values=values, feature_names=names)


def preprocessor_to_dict(p):
    return {
        "numeric": [
            {"name": c.name, "impute_value": c.impute_value, "mean": c.mean, "std": c.std}
            for c in p.numeric
        ],
        "categorical": [
            {"name": c.name, "impute_category": c.impute_category, "categories": list(c.categories)}
            for c in p.categorical
        ],
        "passthrough": list(p.passthrough),
        "schema": [[n, r] for n, r in p.schema],
        "strategy_numeric": p.strategy_numeric,
        "strategy_categorical": p.strategy_categorical,
    }


def preprocessor_from_dict(d):
    return Preprocessor(
        numeric=[NumericColumnState(**c) for c in d["numeric"]],
        categorical=[
            CategoricalColumnState(
                name=c["name"],
                impute_category=c["impute_category"],
                categories=list(c["categories"]),
            )
            for c in d["categorical"]
        ],
        passthrough=list(d["passthrough"]),
        schema=[(n, r) for n, r in d["schema"]],
        strategy_numeric=d["strategy_numeric"],
        strategy_categorical=d["strategy_categorical"],
    )
