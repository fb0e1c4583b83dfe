import csv
import json
import warnings

import numpy as np
import pytest

from coldstart.cli import main
from coldstart.ensemble import bundle_from_dict, bundle_to_dict
from coldstart.pipeline import load_bundle, run_evaluate, run_predict, run_verify
from coldstart.util import load_json


def run_cli(*args):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return main(list(args))


# --- synth -------------------------------------------------------------------

def test_synth_writes_five_files(tmp_path, capsys):
    code = run_cli("synth", "--out", str(tmp_path), "--seed", "42", "--series", "6")
    assert code == 0
    for name in ["episodes.csv", "credits.csv", "genres.csv", "platform.csv", "ground_truth.json"]:
        assert (tmp_path / name).exists()


def test_synth_rerun_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli("synth", "--out", str(a), "--seed", "3", "--series", "5") == 0
    assert run_cli("synth", "--out", str(b), "--seed", "3", "--series", "5") == 0
    for name in ["episodes.csv", "credits.csv", "genres.csv", "platform.csv", "ground_truth.json"]:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_synth_invalid_fraction_names_flag(tmp_path, capsys):
    code = run_cli("synth", "--out", str(tmp_path), "--cold-start-fraction", "1.5")
    assert code == 3
    assert "cold_start_fraction" in capsys.readouterr().err


def test_usage_errors_exit_2(tmp_path):
    assert run_cli() == 2
    assert run_cli("train") == 2  # no inputs given
    assert run_cli("no-such-command") == 2


def test_missing_file_is_data_error(tmp_path):
    code = run_cli(
        "train",
        "--episodes", str(tmp_path / "nope.csv"),
        "--credits", str(tmp_path / "nope2.csv"),
        "--genres", str(tmp_path / "nope3.csv"),
        "--platform", str(tmp_path / "nope4.csv"),
        "--out", str(tmp_path / "out"),
    )
    assert code == 3


# --- train -------------------------------------------------------------------

def test_train_bundle_contract(tiny_run):
    bundle_doc = load_json(tiny_run.result["bundle"])
    members = bundle_doc["members"]
    assert len(members) == 3
    assert abs(sum(m["weight"] for m in members) - 1.0) < 1e-12
    mapes = [m["validation_mape"] for m in members]
    assert mapes == sorted(mapes)
    assert bundle_doc["preprocessor"] is not None
    assert bundle_doc["meta"]["seed"] == 5


def test_train_report_contents(tiny_run):
    report = tiny_run.report
    assert set(report["selected"]) <= {"gbt", "lasso", "ridge"}
    assert report["n_train"] + report["n_holdout"] == report["n_rows"]
    assert sum(report["error_buckets"]["before"]) == sum(report["error_buckets"]["after"])
    assert len(report["error_buckets"]["after"]) == 5  # the five-bucket table shape
    assert report["error_buckets"]["edges"] == [10.0, 20.0, 30.0, 40.0]
    per_series = report["per_series"]
    assert sum(r["n_episodes"] for r in per_series) == report["n_holdout"]
    perm = report["importance"]["permutation"]["features"]
    assert len(perm) == len(report["feature_names"])


def test_train_emits_plots_and_holdout(tiny_run):
    assert (tiny_run.out_dir / "plots" / "actual_vs_predicted.svg").exists()
    assert (tiny_run.out_dir / "plots" / "correlation_heatmap.svg").exists()
    assert (tiny_run.out_dir / "plots" / "importance.svg").exists()
    assert (tiny_run.out_dir / "plots" / "error_buckets.svg").exists()
    with open(tiny_run.out_dir / "holdout_episodes.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == tiny_run.report["n_holdout"]


def test_train_cli_flags_override_config(tmp_path, tiny_run):
    config_path = tmp_path / "cfg.json"
    cfg = dict(tiny_run.config.to_dict())
    cfg["out_dir"] = str(tmp_path / "out_a")
    config_path.write_text(json.dumps(cfg))
    code = run_cli("train", "--config", str(config_path), "--out", str(tmp_path / "out_b"))
    assert code == 0
    assert (tmp_path / "out_b" / "bundle.json").exists()
    assert not (tmp_path / "out_a").exists()


def test_train_survives_partial_family_failure(tmp_path, tiny_run):
    import warnings as w

    from coldstart.pipeline import RunConfig, run_train

    cfg = dict(tiny_run.config.to_dict())
    cfg["out_dir"] = str(tmp_path / "out")
    cfg["families"] = ["lasso", "ridge"]
    # a negative alpha makes every lasso candidate fail to fit
    cfg["grids"] = {"lasso": {"alpha": [-1.0]}, "ridge": {"alpha": [0.1]}}
    with w.catch_warnings():
        w.simplefilter("ignore")
        result = run_train(RunConfig.from_dict(cfg))
    report = json.loads(open(result["report"]).read())
    assert report["selected"] == ["ridge"]
    assert "lasso" in report["failed_families"]

    from coldstart.errors import DataError

    cfg["families"] = ["lasso"]
    cfg["grids"] = {"lasso": {"alpha": [-1.0]}}
    cfg["out_dir"] = str(tmp_path / "out2")
    with w.catch_warnings():
        w.simplefilter("ignore")
        with pytest.raises(DataError):
            run_train(RunConfig.from_dict(cfg))


# --- predict -----------------------------------------------------------------

def test_predict_on_holdout_matches_evaluate(tiny_run, tmp_path):
    out_csv = tmp_path / "preds.csv"
    summary = run_predict(
        tiny_run.result["bundle"],
        tiny_run.result["holdout_episodes"],
        str(tiny_run.data_dir / "credits.csv"),
        str(tiny_run.data_dir / "genres.csv"),
        str(tiny_run.data_dir / "platform.csv"),
        str(out_csv),
    )
    assert summary["n_rows"] == tiny_run.report["n_holdout"]
    with open(out_csv) as fh:
        rows = list(csv.DictReader(fh))
    preds = np.array([float(r["predicted_views"]) for r in rows])
    actual = np.array(
        [float(r["views"]) for r in csv.DictReader(open(tiny_run.result["holdout_episodes"]))]
    )
    from coldstart.metrics import mape

    assert abs(mape(actual, preds) - tiny_run.report["ensemble_validation"]["mape"]) < 1e-9
    assert np.all(preds >= 0)


def test_predict_rerun_identical(tiny_run, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        run_predict(
            tiny_run.result["bundle"],
            tiny_run.result["holdout_episodes"],
            str(tiny_run.data_dir / "credits.csv"),
            str(tiny_run.data_dir / "genres.csv"),
            str(tiny_run.data_dir / "platform.csv"),
            str(out),
        )
    assert a.read_bytes() == b.read_bytes()


def test_predict_handles_unseen_genre(tiny_run, tmp_path):
    genres = tmp_path / "genres.csv"
    original = open(tiny_run.data_dir / "genres.csv").read()
    genres.write_text(original + "S001,weird-new-genre,imdb\n")
    out_csv = tmp_path / "preds.csv"
    summary = run_predict(
        tiny_run.result["bundle"],
        tiny_run.result["holdout_episodes"],
        str(tiny_run.data_dir / "credits.csv"),
        str(genres),
        str(tiny_run.data_dir / "platform.csv"),
        str(out_csv),
    )
    assert summary["n_rows"] > 0  # cold-start path succeeds


def test_predict_clamps_negative_linear_extrapolation(tiny_run, tmp_path):
    # splice a wildly negative linear member into a copy of the bundle
    doc = load_json(tiny_run.result["bundle"])
    member = None
    for m in doc["members"]:
        if m["family"] in ("lasso", "ridge"):
            member = dict(m)
            break
    assert member is not None
    member["model"] = dict(member["model"])
    member["model"]["intercept"] = -1e9
    member["weight"] = 1.0
    member["validation_mape"] = doc["members"][0]["validation_mape"]
    doc["members"] = [member]
    doc["meta"] = dict(doc["meta"], target_transform="none")
    tampered = tmp_path / "bundle.json"
    tampered.write_text(json.dumps(doc))

    out_csv = tmp_path / "preds.csv"
    summary = run_predict(
        str(tampered),
        tiny_run.result["holdout_episodes"],
        str(tiny_run.data_dir / "credits.csv"),
        str(tiny_run.data_dir / "genres.csv"),
        str(tiny_run.data_dir / "platform.csv"),
        str(out_csv),
    )
    assert summary["n_clamped"] == summary["n_rows"]
    rows = list(csv.DictReader(open(out_csv)))
    assert all(float(r["predicted_views"]) == 0.0 for r in rows)
    assert all(r["clamped"] == "1" for r in rows)


# --- evaluate ----------------------------------------------------------------

def test_evaluate_reproduces_training_validation(tiny_run, tmp_path):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = run_evaluate(
            tiny_run.result["bundle"],
            tiny_run.result["holdout_episodes"],
            str(tiny_run.data_dir / "credits.csv"),
            str(tiny_run.data_dir / "genres.csv"),
            str(tiny_run.data_dir / "platform.csv"),
            str(tmp_path / "eval"),
        )
    got = result["metrics"]
    want = tiny_run.report["ensemble_validation"]
    for key in ("mape", "smape", "r2"):
        assert abs(got[key] - want[key]) < 1e-9
    doc = load_json(result["report"])
    assert sum(r["n_episodes"] for r in doc["per_series"]) == tiny_run.report["n_holdout"]
    assert len(doc["error_buckets"]["before"]) == 5
    assert len(doc["error_buckets"]["after"]) == 5


def test_evaluate_rejects_missing_views(tiny_run, tmp_path):
    lines = open(tiny_run.result["holdout_episodes"]).read().splitlines()
    header = lines[0].split(",")
    views_pos = header.index("views")
    cells = lines[1].split(",")
    cells[views_pos] = ""
    lines[1] = ",".join(cells)
    broken = tmp_path / "episodes.csv"
    broken.write_text("\n".join(lines) + "\n")
    code = run_cli(
        "evaluate",
        "--bundle", tiny_run.result["bundle"],
        "--episodes", str(broken),
        "--credits", str(tiny_run.data_dir / "credits.csv"),
        "--genres", str(tiny_run.data_dir / "genres.csv"),
        "--platform", str(tiny_run.data_dir / "platform.csv"),
        "--out", str(tmp_path / "eval"),
    )
    assert code == 3


# --- verify ------------------------------------------------------------------

def test_verify_passes_on_intact_artifacts(tiny_run):
    ok, mismatches = run_verify(
        tiny_run.result["bundle"],
        tiny_run.result["report"],
        tiny_run.result["holdout_episodes"],
        str(tiny_run.data_dir / "credits.csv"),
        str(tiny_run.data_dir / "genres.csv"),
        str(tiny_run.data_dir / "platform.csv"),
    )
    assert ok, mismatches


def test_verify_catches_tampered_report(tiny_run, tmp_path):
    doc = load_json(tiny_run.result["report"])
    doc["ensemble_validation"]["mape"] += 0.5
    tampered = tmp_path / "report.json"
    tampered.write_text(json.dumps(doc))
    code = run_cli(
        "verify",
        "--bundle", tiny_run.result["bundle"],
        "--report", str(tampered),
        "--episodes", tiny_run.result["holdout_episodes"],
        "--credits", str(tiny_run.data_dir / "credits.csv"),
        "--genres", str(tiny_run.data_dir / "genres.csv"),
        "--platform", str(tiny_run.data_dir / "platform.csv"),
    )
    assert code == 4


def test_bundle_round_trip_predicts_identically(tiny_run):
    bundle = load_bundle(tiny_run.result["bundle"])
    clone = bundle_from_dict(bundle_to_dict(bundle))
    rng = np.random.default_rng(0)
    X = rng.normal(size=(100, len(bundle.meta["feature_names"])))
    from coldstart.pipeline import predict_views

    a, _ = predict_views(bundle, X)
    b, _ = predict_views(clone, X)
    assert np.array_equal(a, b)
