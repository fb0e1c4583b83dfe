import json
import warnings
from types import SimpleNamespace

import pytest

from coldstart.pipeline import RunConfig, run_train
from coldstart.synth import SynthConfig, generate

TINY_GRIDS = {
    "gbt": {"rounds": [40], "max_depth": [2, 3], "learning_rate": [0.3]},
    "random_forest": {"n_estimators": [30], "min_samples_split": [10], "max_depth": [10]},
    "decision_tree": {"max_depth": [4, 8], "min_samples_split": [10]},
    "lasso": {"alpha": [0.001, 0.1, 10.0]},
    "ridge": {"alpha": [0.001, 0.1, 10.0]},
    "elastic_net": {"alpha": [0.001, 0.1, 10.0]},
}


@pytest.fixture(scope="session")
def tiny_run(tmp_path_factory):
    """One small end-to-end training run shared across CLI/pipeline tests."""
    root = tmp_path_factory.mktemp("tiny_run")
    data_dir = root / "data"
    out_dir = root / "out"
    generate(
        SynthConfig(n_series=15, episodes_min=4, episodes_max=8, seed=5, noise_sigma=0.2),
        data_dir,
    )
    config = RunConfig(
        episodes=str(data_dir / "episodes.csv"),
        credits=str(data_dir / "credits.csv"),
        genres=str(data_dir / "genres.csv"),
        platform=str(data_dir / "platform.csv"),
        out_dir=str(out_dir),
        seed=5,
        families=["gbt", "lasso", "ridge"],
        n_iter=3,
        cv_folds=3,
        grids=TINY_GRIDS,
        target_transform="log1p",
        importance_repeats=2,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = run_train(config)
    report = json.loads(open(result["report"]).read())
    return SimpleNamespace(
        data_dir=data_dir, out_dir=out_dir, config=config, result=result, report=report
    )
