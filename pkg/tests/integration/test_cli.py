from click.testing import CliRunner
from faltingsheight import periods
from faltingsheight.cli import cli
from io import StringIO
import pandas as pd
import json
import os
import pytest

CONFIG = os.path.join(os.path.dirname(__file__), "..", "..", "config", "config.yaml")


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, [*args, "--config", CONFIG])


def test_height(runner):
    result = invoke(runner, "height", "-A", "-1", "-B", "0")
    assert result.exit_code == 0
    record = json.loads(result.stdout)
    assert record["lambda"] == "1"
    assert record["min_disc"] == 64
    assert abs(record["tau"]["im"] - 1) < 1e-12


def test_height_reports_reduction(runner):
    result = invoke(runner, "height", "-A", "16", "-B", "64")
    assert result.exit_code == 0
    record = json.loads(result.stdout)
    assert record["reduced_from"] == {"A": 16, "B": 64, "d": 2}
    assert (record["A"], record["B"]) == (1, 1)


def test_singular_curve(runner):
    result = invoke(runner, "height", "-A", "-3", "-B", "2")
    assert result.exit_code == 2


def test_precision_below_double(runner):
    result = invoke(runner, "height", "-A", "1", "-B", "1", "--precision", "40")
    assert result.exit_code == 2


def test_missing_config(runner):
    result = runner.invoke(cli, ["constants", "--config", "config/missing.yaml"])
    assert result.exit_code == 2


def test_count(runner):
    result = invoke(runner, "count", "--x", "0.01")
    assert result.exit_code == 0
    record = json.loads(result.stdout)
    assert record["total_direct"] == record["total_sieve"]
    assert set(record["counts_by_lambda"]) == {"1", "2^-12", "3^-12", "6^-12"}


def test_count_csv(runner, tmp_path):
    out = tmp_path / "count.csv"
    result = invoke(runner, "count", "--x", "0.01", "--format", "csv", "--out", str(out))
    assert result.exit_code == 0
    frame = pd.read_csv(out)
    assert len(frame) == 4
    assert (frame["count_direct"] == frame["count_sieve"]).all()


def test_classes(runner):
    result = invoke(runner, "classes", "--lifts", "1")
    assert result.exit_code == 0
    record = json.loads(result.stdout)
    assert record["counts"] == {
        "1": 2168169120,
        "2^-12": 6376968,
        "3^-12": 73440,
        "6^-12": 216,
    }


def test_constants_text(runner):
    result = invoke(runner, "constants", "--format", "text")
    assert result.exit_code == 0
    assert "epsilon0" in result.stdout


def test_boundary_defaults_to_csv(runner):
    result = invoke(runner, "boundary", "--n", "10")
    assert result.exit_code == 0
    frame = pd.read_csv(StringIO(result.stdout))
    assert {"A", "B", "side", "disc_core"} <= set(frame.columns)
    assert 0 < len(frame) <= 10


def test_config_missing_a_setting(runner, tmp_path):
    config = tmp_path / "config.yaml"
    config.write_text("numerics:\n  precision_bits: 64\n")
    result = runner.invoke(cli, ["height", "-A", "1", "-B", "1", "--config", str(config)])
    assert result.exit_code == 2
    assert "tolerance" in result.output


def test_numeric_failure_exits_3(runner, monkeypatch):
    monkeypatch.setattr(periods, "MAX_ROOT_STEPS", 1)
    result = invoke(runner, "height", "-A", "1", "-B", "1")
    assert result.exit_code == 3
    assert "NumericError" in result.output


def test_config_missing_a_region_setting(runner, tmp_path):
    config = tmp_path / "config.yaml"
    config.write_text(
        "numerics:\n  precision_bits: 64\n  tolerance: 1.0e-3\n  threads: 1\n"
        "output:\n  format: json\n"
    )
    result = runner.invoke(cli, ["constants", "--config", str(config)])
    assert result.exit_code == 2
    assert "sup_margin" in result.output
