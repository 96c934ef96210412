from faltingsheight.data import (
    BoundaryPoint,
    BoundaryTrace,
    CensusReport,
    ResidueClassTable,
    SigmaResult,
    QuadraturePiece,
)
from faltingsheight.heights import faltings_HF
from faltingsheight.load import Load, flatten, to_records
from faltingsheight.settings import Settings
from fractions import Fraction
from io import StringIO
import pandas as pd
import json
import os
import pytest

CONFIG = os.path.join(os.path.dirname(__file__), "..", "..", "config", "config.yaml")

COUNTS = {
    Fraction(1): 10,
    Fraction(1, 2**12): 3,
    Fraction(1, 3**12): 2,
    Fraction(1, 6**12): 1,
}


@pytest.fixture
def report():
    return CensusReport(
        0.01,
        counts_by_lambda=COUNTS,
        sieve_by_lambda=COUNTS,
        total_direct=16,
        total_sieve=16,
        prediction=20.0,
    )


def test_flatten():
    assert flatten({"a": 1, "b": {"c": 2, "d": {"e": 3}}}) == {"a": 1, "b_c": 2, "b_d_e": 3}


def test_census_records(report):
    records = to_records(report)
    assert [r["lambda"] for r in records] == ["1", "2^-12", "3^-12", "6^-12"]
    assert records[0] == {"lambda": "1", "count_direct": 10, "count_sieve": 10}


def test_json(report):
    record = json.loads(Load().render(report, format="json"))
    assert record["total_direct"] == 16
    assert record["ratio"] == 0.8
    assert record["counts_by_lambda"]["6^-12"] == 1


def test_csv(report):
    frame = pd.read_csv(StringIO(Load().render(report, format="csv")))
    assert list(frame.columns) == ["lambda", "count_direct", "count_sieve"]
    assert frame["count_direct"].sum() == 16


def test_text_height():
    text = Load().render(faltings_HF(-1, 0), format="text")
    assert "log_HF" in text
    assert "tau_im" in text


def test_text_tables():
    result = SigmaResult(
        29089.0,
        1.0,
        [QuadraturePiece(piece="direct", lo=-6.0, hi=6.0, estimate=29089.0, err=1.0)],
    )
    text = Load().render(result, format="text")
    assert "pieces:" in text
    assert "direct" in text


def test_other_records():
    table = ResidueClassTable(COUNTS, not_weakly_minimal=5)
    assert to_records(table)[1] == {"lambda": "2^-12", "count": 3}
    trace = BoundaryTrace(
        1.0,
        [BoundaryPoint(A=-1.0, B=2.0, disc_core=1e-3, side="positive")],
        skipped_lines=[],
    )
    assert to_records(trace) == [{"A": -1.0, "B": 2.0, "disc_core": 1e-3, "side": "positive"}]


def test_invalid_format(report):
    with pytest.raises(ValueError):
        Load().render(report, format="xml")


def test_format_from_settings(report):
    settings = Settings(CONFIG, env_file=None)
    settings.set_setting("format", "csv")
    assert Load(settings=settings).render(report).startswith("lambda,")
    with pytest.raises(TypeError):
        Load(settings={"format": "csv"})


def test_write_to_file(report, tmp_path):
    out = tmp_path / "count.json"
    Load().write(report, out=str(out))
    assert json.loads(out.read_text())["X"] == 0.01
