import json
import math

import pytest

from harness.cli import cli_main
from harness.campaign import CSV_COLUMNS, load_summary_json

TINY_CONFIG = """
// tiny campaign
{
  "experiment": "mean",
  "distribution": {"kind": "gaussian"},
  "n_samples": 100,
  "n_blocks": 5,
  "dim": 2,
  "pool": {"n_random": 20},
  "n_trials": 3,
  "seed": 99,
  "estimators": ["lm_mom", "empirical_mean"]
}
"""


@pytest.fixture
def five_points(tmp_path):
    path = tmp_path / "points.csv"
    path.write_text("x\n1\n2\n3\n4\n5\n", encoding="utf8")
    return str(path)


@pytest.fixture
def square(tmp_path):
    path = tmp_path / "square.csv"
    path.write_text("0,0\n1,0\n0,1\n1,1\n", encoding="utf8")
    return str(path)


def test_bounds_mean(capsys):
    assert cli_main(["bounds", "--experiment", "mean", "--r", "1", "--k", "100", "--n", "10000"]) == 0
    assert capsys.readouterr().out == "0.8\n"


def test_bounds_other_experiments(capsys):
    assert cli_main(["bounds", "--experiment", "tukey", "--r", "1", "--k", "100", "--n", "10000",
                     "--dim", "2"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.4)
    assert cli_main(["bounds", "--experiment", "lemma7", "--k", "64", "--alpha", "2"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(math.exp(-2.0))
    assert cli_main(["bounds", "--experiment", "pca", "--r", "1", "--k", "50", "--n", "4000", "--gap", "0"]) == 0
    assert capsys.readouterr().out == "inf\n"


def test_bounds_pca_needs_gap():
    assert cli_main(["bounds", "--experiment", "pca", "--r", "1", "--k", "50", "--n", "4000"]) == 1


def test_depth_1d(five_points, capsys):
    assert cli_main(["depth", "--method", "1d", "--points", five_points, "--eta", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["depth"] == 3


def test_depth_default_method_in_plane(square, capsys):
    assert cli_main(["depth", "--points", square, "--eta", "0.5, 0.5"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["depth"] == 2
    assert result["depth_fraction"] == 0.5
    assert cli_main(["depth", "--method", "random", "--points", square, "--eta", "5;5"]) == 0
    assert json.loads(capsys.readouterr().out)["depth"] == 0


def test_depth_dimension_mismatch(square):
    assert cli_main(["depth", "--points", square, "--eta", "1,2,3"]) == 1


def test_estimate(square, capsys):
    assert cli_main(["estimate", "--data", square, "--estimator", "coordwise_mom", "--blocks", "4"]) == 0
    output = json.loads(capsys.readouterr().out)
    assert output["estimate"] == [0.0, 0.0]
    assert cli_main(["estimate", "--data", square, "--estimator", "empirical_cov", "--blocks", "1"]) == 0
    output = json.loads(capsys.readouterr().out)
    assert output["estimate"] == [[0.25, 0.0], [0.0, 0.25]]


def test_estimate_rejects_block_count(square):
    assert cli_main(["estimate", "--data", square, "--estimator", "lm_mom", "--blocks", "9"]) == 1


def test_run(tmp_path):
    config_file = tmp_path / "tiny.json"
    config_file.write_text(TINY_CONFIG, encoding="utf8")
    out_dir = tmp_path / "results"
    assert cli_main(["run", "--config", str(config_file), "--out-dir", str(out_dir), "--seed", "5"]) == 0
    lines = (out_dir / "trials.csv").read_text(encoding="utf8").splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 7
    summary = load_summary_json(str(out_dir / "summary.json"))
    assert summary.seed == 5
    assert summary.name == "tiny"


def test_run_missing_config(tmp_path):
    assert cli_main(["run", "--config", str(tmp_path / "missing.json")]) == 2


def test_run_invalid_config(tmp_path):
    config_file = tmp_path / "invalid.json"
    config_file.write_text(TINY_CONFIG.replace('"n_blocks": 5', '"n_blocks": 500'), encoding="utf8")
    assert cli_main(["run", "--config", str(config_file), "--out-dir", str(tmp_path)]) == 2


@pytest.mark.parametrize("seed", ["-1", str(2 ** 64)])
def test_run_rejects_seed_out_of_range(tmp_path, seed):
    config_file = tmp_path / "tiny.json"
    config_file.write_text(TINY_CONFIG, encoding="utf8")
    out_dir = tmp_path / "results"
    assert cli_main(["run", "--config", str(config_file), "--out-dir", str(out_dir), "--seed=" + seed]) == 2
    assert not out_dir.exists()


def test_usage_errors():
    assert cli_main(["run", "--config", "x.json", "--unknown"]) == 2
    assert cli_main([]) == 2
    assert cli_main(["bounds", "--experiment", "median", "--k", "1"]) == 2
