import itertools

import numpy as np
import pytest

from coldstart.ensemble import (
    EnsembleBundle,
    EnsembleMember,
    build_bundle,
    bundle_from_dict,
    bundle_to_dict,
    compute_weights,
    ensemble_predict,
    select_top_models,
)
from coldstart.errors import DataError
from coldstart.families import FittedModel
from coldstart.linear import LinearModel


def constant_model(value, n_features=1):
    return FittedModel(
        family="ridge",
        params={"alpha": 0.0},
        model=LinearModel(
            coefficients=np.zeros(n_features),
            intercept=float(value),
            alpha=0.0,
            l1_ratio=0.0,
            converged=True,
            n_iterations=1,
        ),
    )


def test_select_top_three_by_documented_mapes():
    # the reported single-model errors: gbt-like 15, forest 18, lasso 20...
    candidates = [
        ("gbt", 15.0),
        ("random_forest", 18.0),
        ("lasso", 20.0),
        ("ridge", 22.0),
        ("elastic_net", 23.0),
        ("decision_tree", 25.0),
    ]
    selected = select_top_models(candidates, k=3)
    assert [name for name, _ in selected] == ["gbt", "random_forest", "lasso"]


def test_select_clamps_to_available():
    selected = select_top_models([("a", 5.0), ("b", 3.0)], k=3)
    assert [name for name, _ in selected] == ["b", "a"]


def test_select_ties_keep_submission_order():
    selected = select_top_models([("a", 5.0), ("b", 5.0), ("c", 5.0)], k=2)
    assert [name for name, _ in selected] == ["a", "b"]


def test_inverse_error_weights():
    weights = compute_weights([10.0, 20.0, 40.0])
    assert np.allclose(weights, [4 / 7, 2 / 7, 1 / 7])


def test_equal_error_weights():
    assert np.allclose(compute_weights([5.0, 5.0, 5.0]), [1 / 3, 1 / 3, 1 / 3])
    assert compute_weights([7.0]) == [1.0]
    assert np.allclose(compute_weights([1.0, 9.0], scheme="equal"), [0.5, 0.5])


def test_zero_error_rejected_then_fallback():
    with pytest.raises(DataError):
        compute_weights([0.0, 1.0])
    bundle = build_bundle(
        [(constant_model(1.0), 0.0), (constant_model(2.0), 1.0), (constant_model(3.0), 0.0)],
        scheme="inverse_error",
    )
    weights = [m.weight for m in bundle.members]
    assert weights == [0.5, 0.5, 0.0]  # zero-error members split the weight


def test_weights_sum_to_one_and_nonnegative():
    rng = np.random.default_rng(0)
    for _ in range(50):
        errors = rng.uniform(0.1, 50.0, size=int(rng.integers(1, 6)))
        for scheme in ("inverse_error", "equal"):
            weights = compute_weights(list(errors), scheme)
            assert abs(sum(weights) - 1.0) <= 1e-12
            assert all(w >= 0 for w in weights)


def test_weight_monotonicity():
    base = compute_weights([10.0, 20.0, 30.0])
    better = compute_weights([5.0, 20.0, 30.0])
    assert better[0] > base[0]


def test_ensemble_predict_hand_arithmetic():
    members = [
        EnsembleMember(constant_model(10.0), validation_mape=1.0, weight=0.5),
        EnsembleMember(constant_model(20.0), validation_mape=2.0, weight=0.3),
        EnsembleMember(constant_model(30.0), validation_mape=3.0, weight=0.2),
    ]
    bundle = EnsembleBundle(members=members, preprocessor=None, scheme="inverse_error")
    pred = ensemble_predict(bundle, np.zeros((1, 1)))
    assert abs(pred[0] - 17.0) < 1e-12


def test_identical_members_identity_and_degenerate_weights():
    members = [
        EnsembleMember(constant_model(7.0), 1.0, weight=1.0),
        EnsembleMember(constant_model(9.0), 2.0, weight=0.0),
    ]
    bundle = EnsembleBundle(members, None, "inverse_error")
    assert ensemble_predict(bundle, np.zeros((3, 1)))[0] == 7.0

    same = [EnsembleMember(constant_model(4.0), 1.0, 0.5), EnsembleMember(constant_model(4.0), 1.0, 0.5)]
    bundle = EnsembleBundle(same, None, "equal")
    assert np.allclose(ensemble_predict(bundle, np.zeros((2, 1))), 4.0)


def test_prediction_within_member_envelope():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(20, 2))
    models = []
    for _ in range(3):
        coef = rng.normal(size=2)
        models.append(
            FittedModel(
                "ridge",
                {},
                LinearModel(coef, float(rng.normal()), 0.0, 0.0, True, 1),
            )
        )
    bundle = build_bundle([(m, e) for m, e in zip(models, [5.0, 7.0, 11.0])])
    preds = [m.predict(X) for m in models]
    combined = ensemble_predict(bundle, X)
    lo = np.min(preds, axis=0)
    hi = np.max(preds, axis=0)
    assert np.all(combined >= lo - 1e-12) and np.all(combined <= hi + 1e-12)


def test_selection_invariant_under_submission_order():
    models = {name: constant_model(i) for i, name in enumerate("abcd")}
    errors = {"a": 4.0, "b": 9.0, "c": 2.0, "d": 7.0}
    baseline = None
    for perm in itertools.permutations("abcd"):
        candidates = [(models[n], errors[n]) for n in perm]
        bundle = build_bundle(candidates, scheme="inverse_error", k=3)
        got = [(m.validation_mape, m.weight) for m in bundle.members]
        if baseline is None:
            baseline = got
        assert got == baseline


def test_members_sorted_ascending_enforced():
    members = [
        EnsembleMember(constant_model(1.0), validation_mape=5.0, weight=0.5),
        EnsembleMember(constant_model(2.0), validation_mape=3.0, weight=0.5),
    ]
    with pytest.raises(DataError):
        EnsembleBundle(members, None, "inverse_error")


def test_weight_sum_enforced():
    members = [EnsembleMember(constant_model(1.0), 5.0, 0.4)]
    with pytest.raises(DataError):
        EnsembleBundle(members, None, "inverse_error")
    with pytest.raises(DataError):
        EnsembleBundle([], None, "inverse_error")
    with pytest.raises(DataError):
        EnsembleBundle([EnsembleMember(constant_model(1.0), 5.0, 1.0)], None, "median_pick")


def test_bundle_serialization_round_trip():
    bundle = build_bundle(
        [(constant_model(10.0), 4.0), (constant_model(12.0), 8.0)],
        scheme="inverse_error",
        meta={"seed": 7, "target_transform": "none"},
    )
    clone = bundle_from_dict(bundle_to_dict(bundle))
    X = np.zeros((5, 1))
    assert np.array_equal(ensemble_predict(bundle, X), ensemble_predict(clone, X))
    assert clone.meta["seed"] == 7
    assert [m.weight for m in clone.members] == [m.weight for m in bundle.members]


def test_bundle_rejects_unknown_schema_version():
    bundle = build_bundle([(constant_model(1.0), 2.0)])
    payload = bundle_to_dict(bundle)
    payload["schema_version"] = 99
    with pytest.raises(DataError):
        bundle_from_dict(payload)
