import hashlib
import json
from pathlib import Path

import pytest

from toptune import DatasetManifest, load_model, write_feature_file
from toptune.cli import main
from toptune.tuning_harness import WALL_TIME_KEYS

from conftest import DATA_DIR, make_blobs

SCHEMA_DIR = Path(__file__).parent.parent / "docs" / "schemas"


@pytest.fixture()
def blob_file(tmp_path):
    fs = make_blobs(100, 8, 3, separation=10.0, seed=17)
    manifest = DatasetManifest(
        dataset_name="blobs",
        class_names=("a", "b", "c"),
        backbone_name="none",
        preprocessing_tag="synthetic",
        n=fs.n,
        d=fs.d,
        num_classes=fs.num_classes,
    )
    path = tmp_path / "blobs.ttf1"
    write_feature_file(fs, manifest, path)
    return path


def strip_wall_times(obj):
    if isinstance(obj, dict):
        return {k: strip_wall_times(v) for k, v in obj.items() if k not in WALL_TIME_KEYS}
    if isinstance(obj, list):
        return [strip_wall_times(v) for v in obj]
    return obj


def table1_comparison_inputs(tmp_path):
    """Fixture files whose joined rows reproduce the published comparison
    table exactly: unit top time makes speedup equal the published ratio,
    and a flat 50% baseline accuracy makes the delta equal the published one."""
    with open(DATA_DIR / "table1.json") as fh:
        rows = json.load(fh)["rows"]
    top = [
        {"dataset": r["dataset"], "acc_top_percent": 50.0 + r["delta_acc_percent"],
         "time_top_s": 1.0, "protocol_tag": "kernel-cv5"}
        for r in rows
    ]
    baseline = [
        {"dataset": r["dataset"], "acc_fine_percent": 50.0,
         "time_fine_s": r["speedup"], "protocol_tag": "sgd-cv5"}
        for r in rows
    ]
    top_path = tmp_path / "top.json"
    base_path = tmp_path / "baseline.json"
    top_path.write_text(json.dumps(top))
    base_path.write_text(json.dumps(baseline))
    return top_path, base_path


class TestTrain:
    def test_defaults_write_model_and_log_line(self, blob_file, tmp_path, capsys):
        out = tmp_path / "model.ttm1"
        code = main([
            "train", "--features", str(blob_file), "--gamma", "100",
            "--lambda", "1e-5", "--out", str(out),
        ])
        assert code == 0
        assert out.exists()
        line = json.loads(capsys.readouterr().out.strip())
        assert line["command"] == "train"
        assert line["converged"] is True
        assert line["iterations"] >= 1
        assert line["dataset"] == "blobs"
        model = load_model(out)
        assert model.num_centers == line["num_centers"]

    def test_missing_features_file_exits_2_and_names_path(self, tmp_path, capsys):
        missing = tmp_path / "nope.ttf1"
        code = main([
            "train", "--features", str(missing), "--gamma", "100",
            "--lambda", "1e-5", "--out", str(tmp_path / "m.ttm1"),
        ])
        assert code == 2
        assert str(missing) in capsys.readouterr().err

    def test_zero_gamma_fails_before_reading_features(self, tmp_path, capsys):
        # the features path does not even exist: validation must come first
        code = main([
            "train", "--features", str(tmp_path / "absent.ttf1"), "--gamma", "0",
            "--lambda", "1e-5", "--out", str(tmp_path / "m.ttm1"),
        ])
        assert code == 2
        err = capsys.readouterr().err
        assert "gamma" in err
        assert "absent.ttf1" not in err

    def test_same_seed_reproduces_model_up_to_wall_time(self, blob_file, tmp_path):
        outs = []
        for name in ("a.ttm1", "b.ttm1"):
            out = tmp_path / name
            main([
                "train", "--features", str(blob_file), "--gamma", "100",
                "--lambda", "1e-5", "--seed", "9", "--out", str(out),
            ])
            outs.append(load_model(out))
        a, b = outs
        assert a.centers.tobytes() == b.centers.tobytes()
        assert a.coefficients.tobytes() == b.coefficients.tobytes()
        log_a = {k: v for k, v in a.training_log.to_json_dict().items()
                 if k not in WALL_TIME_KEYS}
        log_b = {k: v for k, v in b.training_log.to_json_dict().items()
                 if k not in WALL_TIME_KEYS}
        assert log_a == log_b

    def test_input_file_not_mutated(self, blob_file, tmp_path):
        before = hashlib.sha256(blob_file.read_bytes()).hexdigest()
        main([
            "train", "--features", str(blob_file), "--gamma", "100",
            "--lambda", "1e-5", "--out", str(tmp_path / "m.ttm1"),
        ])
        assert hashlib.sha256(blob_file.read_bytes()).hexdigest() == before


class TestGridCV:
    def test_default_grid_runs_four_configs(self, blob_file, tmp_path):
        out = tmp_path / "cv.json"
        code = main([
            "grid-cv", "--features", str(blob_file), "--out", str(out), "--seed", "3",
        ])
        assert code == 0
        data = json.loads(out.read_text())
        assert len(data["records"]) == 4
        assert data["total_wall_time_s"] == sum(
            r["wall_time_s"] for r in data["records"]
        )
        assert data["accuracy_source"] == "cv_mean"

    def test_output_matches_schema(self, blob_file, tmp_path):
        jsonschema = pytest.importorskip("jsonschema")
        out = tmp_path / "cv.json"
        main(["grid-cv", "--features", str(blob_file), "--out", str(out)])
        with open(SCHEMA_DIR / "gridcv.schema.json") as fh:
            schema = json.load(fh)
        jsonschema.validate(json.loads(out.read_text()), schema)

    def test_single_fold_exits_2(self, blob_file, tmp_path):
        code = main([
            "grid-cv", "--features", str(blob_file), "--folds", "1",
            "--out", str(tmp_path / "cv.json"),
        ])
        assert code == 2

    def test_same_seed_identical_apart_from_wall_time(self, blob_file, tmp_path):
        out_a, out_b = tmp_path / "a.json", tmp_path / "b.json"
        main(["grid-cv", "--features", str(blob_file), "--seed", "5", "--out", str(out_a)])
        main(["grid-cv", "--features", str(blob_file), "--seed", "5", "--out", str(out_b)])
        a = strip_wall_times(json.loads(out_a.read_text()))
        b = strip_wall_times(json.loads(out_b.read_text()))
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_explicit_kernel_grid(self, blob_file, tmp_path):
        out = tmp_path / "cv.json"
        code = main([
            "grid-cv", "--features", str(blob_file), "--gammas", "1,10",
            "--lambdas", "0.001", "--out", str(out),
        ])
        assert code == 0
        assert len(json.loads(out.read_text())["records"]) == 2

    def test_linear_grid(self, blob_file, tmp_path):
        out = tmp_path / "cv.json"
        code = main([
            "grid-cv", "--features", str(blob_file), "--kind", "linear",
            "--out", str(out),
        ])
        assert code == 0
        data = json.loads(out.read_text())
        assert len(data["records"]) == 3
        assert all("alpha" in r["config"] for r in data["records"])

    def test_holdout_test_features(self, blob_file, tmp_path):
        out = tmp_path / "cv.json"
        code = main([
            "grid-cv", "--features", str(blob_file),
            "--test-features", str(blob_file), "--out", str(out),
        ])
        assert code == 0
        data = json.loads(out.read_text())
        assert data["test_accuracy_source"] == "holdout_test"
        assert 0.0 <= data["test_accuracy_percent"] <= 100.0


class TestCompare:
    def test_published_rows_reproduce_aggregate(self, tmp_path, capsys):
        top_path, base_path = table1_comparison_inputs(tmp_path)
        out = tmp_path / "report.json"
        code = main([
            "compare", "--top", str(top_path), "--baseline", str(base_path),
            "--format", "json", "--out", str(out),
        ])
        assert code == 0
        summary = json.loads(capsys.readouterr().out.strip())
        assert summary["rows"] == 32
        assert summary["mean_speedup"] == pytest.approx(84.64, abs=0.5)
        assert summary["std_speedup"] == pytest.approx(38.97, abs=0.5)
        assert summary["frac_within_band"] == pytest.approx(19 / 32, abs=1 / 32)

    def test_disjoint_datasets_exit_2(self, tmp_path, capsys):
        (tmp_path / "top.json").write_text(json.dumps(
            [{"dataset": "x", "acc_top_percent": 50.0, "time_top_s": 1.0}]
        ))
        (tmp_path / "base.json").write_text(json.dumps(
            [{"dataset": "y", "acc_fine_percent": 50.0, "time_fine_s": 1.0}]
        ))
        code = main([
            "compare", "--top", str(tmp_path / "top.json"),
            "--baseline", str(tmp_path / "base.json"),
            "--out", str(tmp_path / "r.md"),
        ])
        assert code == 2
        assert "dataset names" in capsys.readouterr().err

    def test_zero_band_counts_only_exact_ties(self, tmp_path, capsys):
        top_path, base_path = table1_comparison_inputs(tmp_path)
        code = main([
            "compare", "--top", str(top_path), "--baseline", str(base_path),
            "--band", "0", "--format", "json", "--out", str(tmp_path / "r.json"),
        ])
        assert code == 0
        summary = json.loads(capsys.readouterr().out.strip())
        # exactly two published deltas are 0.00
        assert summary["frac_within_band"] == pytest.approx(2 / 32)

    def test_markdown_output(self, tmp_path):
        top_path, base_path = table1_comparison_inputs(tmp_path)
        out = tmp_path / "report.md"
        main(["compare", "--top", str(top_path), "--baseline", str(base_path),
              "--out", str(out)])
        lines = out.read_text().splitlines()
        assert len(lines) == 2 + 32
        assert lines[0].startswith("| Dataset")

    def test_invalid_json_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        good = tmp_path / "good.json"
        good.write_text(json.dumps(
            [{"dataset": "x", "acc_fine_percent": 50.0, "time_fine_s": 1.0}]
        ))
        code = main(["compare", "--top", str(bad), "--baseline", str(good),
                     "--out", str(tmp_path / "r.md")])
        assert code == 2
        assert "invalid JSON" in capsys.readouterr().err


class TestConfigFile:
    def test_whole_command_from_config(self, blob_file, tmp_path, capsys):
        out = tmp_path / "model.ttm1"
        config = tmp_path / "train.json"
        config.write_text(json.dumps({
            "features": str(blob_file), "gamma": 100.0, "lambda": 1e-5,
            "num-centers": 30, "out": str(out),
        }))
        code = main(["train", "--config", str(config)])
        assert code == 0
        assert out.exists()
        assert json.loads(capsys.readouterr().out.strip())["num_centers"] == 30

    def test_explicit_flag_overrides_config(self, blob_file, tmp_path):
        out = tmp_path / "cv.json"
        config = tmp_path / "cv-config.json"
        config.write_text(json.dumps({
            "features": str(blob_file), "out": str(out), "folds": 3, "seed": 1,
        }))
        code = main(["grid-cv", "--config", str(config), "--folds", "4"])
        assert code == 0
        assert json.loads(out.read_text())["folds"] == 4

    def test_list_values_match_csv_flags(self, blob_file, tmp_path):
        out = tmp_path / "cv.json"
        config = tmp_path / "cv-config.json"
        config.write_text(json.dumps({
            "features": str(blob_file), "out": str(out),
            "gammas": [1.0, 10.0], "lambdas": [0.001],
        }))
        code = main(["grid-cv", "--config", str(config)])
        assert code == 0
        assert len(json.loads(out.read_text())["records"]) == 2

    def test_unknown_key_exits_2(self, blob_file, tmp_path, capsys):
        config = tmp_path / "bad.json"
        config.write_text(json.dumps({"features": str(blob_file), "bogus_knob": 1}))
        code = main(["grid-cv", "--config", str(config), "--out", str(tmp_path / "o.json")])
        assert code == 2
        assert "bogus_knob" in capsys.readouterr().err

    def test_missing_required_value_exits_2(self, blob_file, tmp_path, capsys):
        # neither flag nor config provides --out
        code = main(["train", "--features", str(blob_file), "--gamma", "100",
                     "--lambda", "1e-5"])
        assert code == 2
        assert "--out" in capsys.readouterr().err

    def test_config_values_pass_through_flag_converters(self, blob_file, tmp_path):
        out = tmp_path / "cv.json"
        config = tmp_path / "c.json"
        config.write_text(json.dumps({
            "features": str(blob_file), "out": str(out), "folds": "3",
        }))
        assert main(["grid-cv", "--config", str(config)]) == 0
        assert json.loads(out.read_text())["folds"] == 3

    def test_config_value_of_wrong_type_exits_2(self, blob_file, tmp_path, capsys):
        config = tmp_path / "c.json"
        config.write_text(json.dumps({
            "features": str(blob_file), "out": "o.json", "folds": "three",
        }))
        assert main(["grid-cv", "--config", str(config)]) == 2
        assert "folds" in capsys.readouterr().err
