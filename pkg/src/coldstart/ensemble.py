"""Top-k model selection and weighted-average prediction combining.

The default weighting is inverse validation error, normalized to sum to 1:
a member with half the error of another carries twice the weight. Equal
weighting is available for ablation. A zero validation error makes the
inverse scheme degenerate; the bundle builder then falls back to equal
weights shared among the zero-error members.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .families import FittedModel
from .preprocess import preprocessor_from_dict, preprocessor_to_dict

SCHEMES = ("inverse_error", "equal")

BUNDLE_SCHEMA_VERSION = 1


@dataclass
class EnsembleMember:
    model: FittedModel
    validation_mape: float
    weight: float = 0.0


@dataclass
class EnsembleBundle:
    members: list
    preprocessor: object  # fitted Preprocessor, or None for matrix-level use
    scheme: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DataError(f"unknown weighting scheme {self.scheme!r}")
        if not self.members:
            raise DataError("ensemble needs at least one member")
        total = sum(m.weight for m in self.members)
        if abs(total - 1.0) > 1e-12:
            raise DataError(f"member weights sum to {total!r}, expected 1")
        mapes = [m.validation_mape for m in self.members]
        if any(b < a for a, b in zip(mapes, mapes[1:])):
            raise DataError("members must be sorted by ascending validation MAPE")


def select_top_models(candidates, k=3):
    """The k candidates with smallest validation error, stable under ties.

    ``candidates`` is a list of (model, validation_mape) pairs; k clamps to
    the number available.
    """
    if not candidates:
        raise DataError("no candidates to select from")
    order = sorted(range(len(candidates)), key=lambda i: (candidates[i][1], i))
    return [candidates[i] for i in order[: max(1, min(k, len(candidates)))]]


def compute_weights(validation_errors, scheme="inverse_error"):
    """Normalized member weights from validation errors."""
    if scheme not in SCHEMES:
        raise DataError(f"unknown weighting scheme {scheme!r}")
    errors = [float(e) for e in validation_errors]
    if not errors:
        raise DataError("no errors to weight")
    if scheme == "equal":
        return [1.0 / len(errors)] * len(errors)
    if any(e <= 0 for e in errors):
        raise DataError("inverse_error weighting needs strictly positive errors")
    inv = [1.0 / e for e in errors]
    total = sum(inv)
    return [v / total for v in inv]


def weights_for_errors(errors, scheme="inverse_error"):
    """compute_weights plus the degenerate-case fallback: zero-error members
    under inverse_error share equal weight among themselves."""
    if scheme == "inverse_error" and any(e == 0 for e in errors):
        zero = [i for i, e in enumerate(errors) if e == 0]
        return [1.0 / len(zero) if i in zero else 0.0 for i in range(len(errors))]
    return compute_weights(errors, scheme)


def build_bundle(candidates, preprocessor=None, scheme="inverse_error", k=3, meta=None):
    """Select the top-k candidates, weight them, and assemble the bundle."""
    selected = select_top_models(candidates, k=k)
    errors = [e for _, e in selected]
    weights = weights_for_errors(errors, scheme)
    members = [
        EnsembleMember(model=model, validation_mape=err, weight=w)
        for (model, err), w in zip(selected, weights)
    ]
    return EnsembleBundle(
        members=members, preprocessor=preprocessor, scheme=scheme, meta=dict(meta or {})
    )


def ensemble_predict(bundle, X):
    """Weighted average of member predictions on a numeric feature matrix."""
    out = None
    for member in bundle.members:
        pred = np.asarray(member.model.predict(X), dtype=float)
        out = member.weight * pred if out is None else out + member.weight * pred
    return out


def bundle_to_dict(bundle):
    return {
        "schema_version": BUNDLE_SCHEMA_VERSION,
        "scheme": bundle.scheme,
        "meta": dict(bundle.meta),
        "preprocessor": (
            None if bundle.preprocessor is None else preprocessor_to_dict(bundle.preprocessor)
        ),
        "members": [
            {
                "validation_mape": m.validation_mape,
                "weight": m.weight,
                **m.model.to_dict(),
            }
            for m in bundle.members
        ],
    }


def bundle_from_dict(d):
    version = d.get("schema_version")
    if version != BUNDLE_SCHEMA_VERSION:
        raise DataError(f"unsupported bundle schema version {version!r}")
    members = [
        EnsembleMember(
            model=FittedModel.from_dict(m),
            validation_mape=m["validation_mape"],
            weight=m["weight"],
        )
        for m in d["members"]
    ]
    prep = None if d.get("preprocessor") is None else preprocessor_from_dict(d["preprocessor"])
    return EnsembleBundle(members=members, preprocessor=prep, scheme=d["scheme"], meta=dict(d.get("meta", {})))
