"""End-to-end runs of every CLI verb on miniature workloads."""

import numpy as np
import pytest
from click.testing import CliRunner

from gaplearn import jsonio
from gaplearn.cli import available_presets, main, resolve_config

TINY_DATASET = {
    "seed": 5,
    "precision": "f64",
    "dataset": {"family": "nearest_neighbor_1d", "sizes": [3], "n_samples": 6, "n_steps": 4},
}

TINY_MODELS = {
    **TINY_DATASET,
    "dataset": {**TINY_DATASET["dataset"], "val_fraction": 0.34},
    "models": [
        {"name": "dense", "kind": "fcnn", "hidden": [8]},
        {"name": "recurrent", "kind": "lstm", "units": [6]},
    ],
    "training": {"epochs": 2, "batch_size": 4, "lr": 1e-3},
}


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


def invoke(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    jsonio.write_json(path, cfg)
    return path


def test_version(runner):
    result = invoke(runner, ["--version"])
    assert "0.1.0" in result.output


def test_unknown_preset_lists_alternatives(runner, tmp_path):
    result = runner.invoke(main, ["generate", "-c", "nope", "-o", str(tmp_path / "x")])
    assert result.exit_code != 0
    for name in available_presets():
        assert name in result.output


def test_packaged_presets_resolve():
    names = available_presets()
    assert {"compare-desk", "overfit-desk", "extrapolate-desk", "parity-desk"} <= set(names)
    for name in names:
        cfg = resolve_config(name)
        assert cfg["models"], name
        assert cfg["dataset"]["n_samples"] > 0


def test_resolve_config_merges_and_overrides(tmp_path):
    path = write_config(tmp_path, {"dataset": {"sizes": [4]}, "model": {"kind": "fcnn"}})
    cfg = resolve_config(str(path), seed=99, precision="f64")
    assert cfg["dataset"]["sizes"] == [4]
    assert cfg["dataset"]["n_steps"] == 50
    assert cfg["seed"] == 99
    assert cfg["precision"] == "f64"
    assert cfg["models"] == [{"kind": "fcnn"}]


def test_generate_outputs(runner, tmp_path):
    cfg_path = write_config(tmp_path, TINY_DATASET)
    out = tmp_path / "gen"
    result = invoke(runner, ["generate", "-c", str(cfg_path), "-o", str(out)])
    assert "wrote 6 samples" in result.output
    for name in (
        "dataset.jsonl",
        "min_gaps.csv",
        "min_gaps.png",
        "trajectories.csv",
        "trajectories.png",
        "generate.report.json",
    ):
        assert (out / name).exists(), name
    report = jsonio.read_json(out / "generate.report.json")
    assert report["kind"] == "generate-report"
    assert report["n_samples"] == 6
    assert len(report["config_sha256"]) == 64
    assert report["dataset_sha256"] == jsonio.sha256_file(out / "dataset.jsonl")


def test_generate_is_byte_identical(runner, tmp_path):
    cfg_path = write_config(tmp_path, TINY_DATASET)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    invoke(runner, ["generate", "-c", str(cfg_path), "-o", str(out_a)])
    invoke(runner, ["generate", "-c", str(cfg_path), "-o", str(out_b)])
    assert (out_a / "dataset.jsonl").read_bytes() == (out_b / "dataset.jsonl").read_bytes()


def test_generate_seed_override_changes_data(runner, tmp_path):
    cfg_path = write_config(tmp_path, TINY_DATASET)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    invoke(runner, ["generate", "-c", str(cfg_path), "-o", str(out_a)])
    invoke(runner, ["generate", "-c", str(cfg_path), "-o", str(out_b), "--seed", "6"])
    assert (out_a / "dataset.jsonl").read_bytes() != (out_b / "dataset.jsonl").read_bytes()


@pytest.fixture(scope="module")
def trained(runner, tmp_path_factory):
    """Generate a tiny dataset and train both model kinds on it once."""
    root = tmp_path_factory.mktemp("cli-train")
    cfg_path = write_config(root, TINY_MODELS)
    data_dir, out = root / "data", root / "run"
    invoke(runner, ["generate", "-c", str(cfg_path), "-o", str(data_dir)])
    result = invoke(
        runner,
        ["train", "-c", str(cfg_path), "--data", str(data_dir / "dataset.jsonl"), "-o", str(out)],
    )
    return cfg_path, data_dir, out, result


def test_train_outputs(trained):
    _, _, out, result = trained
    assert "training dense" in result.output
    assert "training recurrent" in result.output
    for name in (
        "dense.ckpt.npz",
        "recurrent.ckpt.npz",
        "history.csv",
        "history.png",
        "train.report.json",
    ):
        assert (out / name).exists(), name
    report = jsonio.read_json(out / "train.report.json")
    assert set(report["models"]) == {"dense", "recurrent"}
    for stats in report["models"].values():
        assert np.isfinite(stats["final_val_loss"])
        assert stats["val_mse_gap"] >= 0


def test_evaluate_checkpoint(runner, trained, tmp_path):
    _, data_dir, run_dir, _ = trained
    out = tmp_path / "eval"
    result = invoke(
        runner,
        [
            "evaluate",
            "--checkpoint",
            str(run_dir / "recurrent.ckpt.npz"),
            "--data",
            str(data_dir / "dataset.jsonl"),
            "-o",
            str(out),
        ],
    )
    assert "mse_gap" in result.output
    for name in ("overlay.csv", "overlay.png", "evaluate.report.json"):
        assert (out / name).exists(), name
    report = jsonio.read_json(out / "evaluate.report.json")
    assert report["n_samples"] == 6
    assert report["mse_gap"] >= 0


def test_train_rejects_config_without_models(runner, trained, tmp_path):
    _, data_dir, _, _ = trained
    cfg_path = write_config(tmp_path, TINY_DATASET)
    result = runner.invoke(
        main,
        [
            "train",
            "-c",
            str(cfg_path),
            "--data",
            str(data_dir / "dataset.jsonl"),
            "-o",
            str(tmp_path / "x"),
        ],
    )
    assert result.exit_code != 0
    assert "no models" in result.output


@pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
@pytest.mark.filterwarnings("ignore:invalid value:RuntimeWarning")
def test_train_divergence_exit_code(runner, trained, tmp_path):
    _, data_dir, _, _ = trained
    cfg = {
        **TINY_MODELS,
        "models": [{"name": "dense", "kind": "fcnn", "hidden": [8]}],
        "training": {"epochs": 2, "batch_size": 4, "lr": 1e155},
    }
    cfg_path = write_config(tmp_path, cfg)
    out = tmp_path / "run"
    result = runner.invoke(
        main,
        ["train", "-c", str(cfg_path), "--data", str(data_dir / "dataset.jsonl"), "-o", str(out)],
    )
    assert result.exit_code == 3
    assert "non-finite" in result.output


def test_extrapolate(runner, tmp_path):
    cfg = {
        "seed": 5,
        "dataset": {"family": "nearest_neighbor_1d", "sizes": [3], "n_samples": 8, "n_steps": 4,
                    "val_fraction": 0.26},
        "encoding": {"m_embed": 8, "placement_seed": 2},
        "models": [{"name": "line", "kind": "conv1d", "filters": [4], "kernel_size": 3, "head": 8}],
        "training": {"epochs": 1, "batch_size": 4, "lr": 1e-3},
        "evaluation": {"sizes": [3, 4], "n_samples_per_size": 3, "eval_seed": 77},
    }
    cfg_path = write_config(tmp_path, cfg)
    out = tmp_path / "extra"
    result = invoke(runner, ["extrapolate", "-c", str(cfg_path), "-o", str(out)])
    assert "size 4" in result.output
    for name in (
        "dataset.jsonl",
        "scatter.csv",
        "scatter.png",
        "size_mse.csv",
        "size_mse.png",
        "extrapolate.report.json",
    ):
        assert (out / name).exists(), name
    report = jsonio.read_json(out / "extrapolate.report.json")
    assert set(report["per_size"]) == {"3", "4"}
    assert report["per_size"]["4"]["n_samples"] == 3


def test_speedup_output(runner, tmp_path):
    out = tmp_path / "speedup"
    result = invoke(
        runner,
        [
            "speedup",
            "--n-train", "90000",
            "--tau-solve", "5400",
            "--tau-train", "0.96",
            "--tau-infer", "0.005",
            "--tau-generate", "0.12",
            "-o", str(out),
        ],
    )
    assert "exact 19440000/1079999" in result.output
    assert "minimal winning query count: 19" in result.output
    report = jsonio.read_json(out / "speedup.report.json")
    assert report["min_use_count"] == 19


def test_speedup_no_break_even(runner):
    result = invoke(
        runner,
        ["speedup", "--n-train", "10", "--tau-solve", "1", "--tau-train", "1",
         "--tau-infer", "2"],
    )
    assert "no break-even" in result.output


def test_estimate_runs(runner):
    result = invoke(
        runner,
        ["estimate-runs", "--instances", "10000", "--steps", "50",
         "--repetitions", "200000", "--seconds-per-run", "0.001"],
    )
    assert "total runs: 100000000000" in result.output
    assert "1157 days" in result.output


def test_diagnostics_verb(runner, tmp_path):
    out = tmp_path / "diag"
    result = invoke(runner, ["diagnostics", "-o", str(out)])
    assert "all 7 checks passed" in result.output
    report = jsonio.read_json(out / "diagnostics.report.json")
    assert report["n_failed"] == 0
    assert report["n_checks"] == 7


def test_diagnostics_data_histogram(runner, trained, tmp_path):
    cfg_path, data_dir, _, _ = trained
    out = tmp_path / "hist"
    result = invoke(
        runner,
        [
            "diagnostics",
            "-c",
            str(cfg_path),
            "--data",
            str(data_dir / "dataset.jsonl"),
            "--bins",
            "5",
            "-o",
            str(out),
        ],
    )
    n_values = TINY_DATASET["dataset"]["n_samples"] * TINY_DATASET["dataset"]["n_steps"]
    assert f"pooled {n_values} gap values" in result.output
    assert (out / "gap_histogram.png").exists()
    rows = (out / "gap_histogram.csv").read_text().splitlines()
    assert rows[0] == "bin_left,bin_right,count"
    assert sum(int(r.rsplit(",", 1)[1]) for r in rows[1:]) == n_values
    report = jsonio.read_json(out / "diagnostics.report.json")
    assert report["histogram"]["n_values"] == n_values


def test_diagnostics_landscape(runner, tmp_path):
    cfg_path = write_config(tmp_path, TINY_DATASET)
    out = tmp_path / "scan"
    result = invoke(
        runner,
        ["diagnostics", "-c", str(cfg_path), "--landscape", "0,1", "--grid-points", "3", "-o", str(out)],
    )
    assert "scanned couplings (0, 1) over 3x3 values" in result.output
    assert (out / "landscape.png").exists()
    rows = (out / "landscape.csv").read_text().splitlines()
    assert rows[0] == "coupling_a,coupling_b,min_gap"
    assert len(rows) == 1 + 9
    report = jsonio.read_json(out / "diagnostics.report.json")
    assert report["landscape"]["grid_points"] == 3
    assert report["landscape"]["min_over_grid"] > 0


def test_diagnostics_landscape_rejects_bad_spec(runner, tmp_path):
    cfg_path = write_config(tmp_path, TINY_DATASET)
    result = runner.invoke(
        main, ["diagnostics", "-c", str(cfg_path), "--landscape", "zero", "-o", str(tmp_path / "x")]
    )
    assert result.exit_code != 0
    assert "wants 'A,B' indices" in result.output
