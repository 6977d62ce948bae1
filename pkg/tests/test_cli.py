"""Tests for the command-line interface."""

import json
import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from ritz_bounds import cli
from ritz_bounds.bounds import EigvecBoundReport
from ritz_bounds.cli import (
    EXIT_NOT_APPLICABLE,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_USAGE,
    build_table1,
    main,
    parse_eta_list,
)
from ritz_bounds.config import RunConfig
from ritz_bounds.matrix_io import write_matrix
from ritz_bounds.reference_values import TEMPLE_KATO_NOTE


@pytest.fixture(autouse=True)
def clear_seed(monkeypatch):
    """Keep RITZ_SEED from the outer environment out of the tests."""
    monkeypatch.delenv("RITZ_SEED", raising=False)


@pytest.fixture
def e1_file(tmp_path):
    """Basis file holding e_1 in two dimensions."""
    path = tmp_path / "basis.txt"
    write_matrix(path, [[1.0], [0.0]])
    return path


@pytest.fixture
def ones_file(tmp_path):
    """The all-ones two-by-two matrix."""
    path = tmp_path / "ones.txt"
    write_matrix(path, [[1.0, 1.0], [1.0, 1.0]])
    return path


@pytest.fixture
def factor_file(tmp_path):
    """Factor of the family at eta = 1."""
    path = tmp_path / "factor.txt"
    write_matrix(path, [[0.1, -0.1], [0.0, 1.0]], is_factor=True)
    return path


def run_json(capsys, argv):
    """Run main with JSON output and parse stdout."""
    code = main(argv + ["--format", "json"])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out else None)


class TestEtaList:
    """Tests for --eta-list parsing."""

    def test_parse(self):
        """Test a comma-separated list."""
        assert parse_eta_list("1, 2.5,3") == [1.0, 2.5, 3.0]

    @pytest.mark.parametrize("text", ["", "a,b", "1,0", "1,-2", "inf"])
    def test_rejects(self, text):
        """Test invalid lists."""
        with pytest.raises(ValueError):
            parse_eta_list(text)


class TestTable1:
    """Tests for the table1 command."""

    def test_rows(self):
        """Test flags for the tabulated eta values."""
        report = build_table1([1.0, 2.0, 3.0, 4.0, 5.0], RunConfig())
        rows = report.sections["lower_estimates"]
        assert [row["sin_theta_flag"] for row in rows] == ["match"] * 5
        assert rows[1]["temple_kato_flag"] == "mismatch"
        assert rows[1]["temple_kato"] == pytest.approx(0.009975, abs=1e-6)
        assert TEMPLE_KATO_NOTE in report.notes
        for row in rows:
            assert row["temple_kato"] <= row["lambda_1"] + 1e-12
            assert row["sin_theta_bound"] <= row["lambda_1"]

    def test_untabulated_eta(self):
        """Test that an eta outside the table has no published cell."""
        row = build_table1([1.5], RunConfig()).sections["lower_estimates"][0]
        assert row["sin_theta_published"] is None
        assert row["sin_theta_flag"] == "n/a"
        assert row["sin_theta"] == pytest.approx(1.0 / math.sqrt(226.0), rel=1e-9)

    def test_main_json(self, capsys):
        """Test the JSON report from main."""
        code, data = run_json(capsys, ["table1", "--eta-list", "1,2"])
        assert code == EXIT_OK
        assert data["schema"] == "report-v1"
        assert data["command"] == "table1"
        assert len(data["sections"]["lower_estimates"]) == 2

    def test_bad_list_exit_code(self, capsys):
        """Test that a bad eta list exits with the usage code."""
        assert main(["table1", "--eta-list", "0"]) == EXIT_USAGE


class TestBounds:
    """Tests for the bounds command."""

    def test_factor_input(self, capsys, factor_file, e1_file):
        """Test certification of e_1 against the factored family."""
        code, data = run_json(capsys, ["bounds", "--matrix", str(factor_file), "--basis", str(e1_file)])
        assert code == EXIT_OK
        assert data["status"] == "ok"
        angles = data["sections"]["angles"]
        assert angles["sin_theta_p"] == pytest.approx(1.0 / math.sqrt(101.0), rel=1e-9)
        assert data["sections"]["ritz"][0]["mu"] == pytest.approx(0.01)
        assert data["sections"]["localization"]["applies"]
        assert data["sections"]["temple_kato"]["bound"] is not None

    def test_not_applicable(self, capsys, ones_file, e1_file):
        """Test that the all-ones matrix against e_1 exits with code 2."""
        code, data = run_json(capsys, ["bounds", "--matrix", str(ones_file), "--basis", str(e1_file)])
        assert code == EXIT_NOT_APPLICABLE
        assert data["status"] == "not_applicable"
        assert "matching" not in data["sections"]

    def test_dimension_mismatch(self, tmp_path, e1_file):
        """Test that a basis of the wrong height is a usage error."""
        matrix = tmp_path / "h3.txt"
        write_matrix(matrix, [[2.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 4.0]])
        assert main(["bounds", "--matrix", str(matrix), "--basis", str(e1_file)]) == EXIT_USAGE

    def test_not_psd(self, tmp_path, e1_file):
        """Test that an indefinite matrix is a usage error."""
        matrix = tmp_path / "indef.txt"
        write_matrix(matrix, [[1.0, 0.0], [0.0, -1.0]])
        assert main(["bounds", "--matrix", str(matrix), "--basis", str(e1_file)]) == EXIT_USAGE

    def test_missing_file(self, tmp_path, e1_file):
        """Test that an unreadable file is a usage error."""
        missing = tmp_path / "missing.txt"
        assert main(["bounds", "--matrix", str(missing), "--basis", str(e1_file)]) == EXIT_USAGE

    def test_output_file(self, tmp_path, factor_file, e1_file, capsys):
        """Test --output writes the report instead of stdout."""
        out = tmp_path / "report.csv"
        argv = ["bounds", "--matrix", str(factor_file), "--basis", str(e1_file)]
        code = main(argv + ["--format", "csv", "--output", str(out)])
        assert code == EXIT_OK
        assert capsys.readouterr().out == ""
        assert "# angles" in out.read_text(encoding="utf-8")

    def test_violated_bound_exits_numerical(self, capsys, monkeypatch, factor_file, e1_file):
        """Test that a Ritz vector error above its bound fails the report."""

        def violated(*args, **kwargs):
            return EigvecBoundReport(bounds=(0.1,), actual=(0.5,), sin_theta_p=args[3])

        monkeypatch.setattr(cli, "eigenvector_bounds", violated)
        code, data = run_json(capsys, ["bounds", "--matrix", str(factor_file), "--basis", str(e1_file)])
        assert code == EXIT_NUMERICAL
        assert data["status"] == "failed"

    def test_violated_match_exits_numerical(self, capsys, monkeypatch, factor_file, e1_file):
        """Test that a matched pair outside sin(Theta_p) fails the report."""
        real_match = cli.match_ritz

        def tight(ritz, eigs, sin_theta_p=None, zero_tol=None):
            return real_match(ritz, eigs, 0.0)

        monkeypatch.setattr(cli, "match_ritz", tight)
        code, data = run_json(capsys, ["bounds", "--matrix", str(factor_file), "--basis", str(e1_file)])
        assert code == EXIT_NUMERICAL
        assert data["status"] == "failed"
        assert data["sections"]["matching"][0]["within_bound"] is False


class TestString:
    """Tests for the string command."""

    def test_report(self, capsys):
        """Test the string report sections."""
        code, data = run_json(capsys, ["string", "--eta", "10", "--modes", "2", "--mesh", "1000"])
        assert code == EXIT_OK
        assert set(data["sections"]) == {
            "eigenvalues",
            "residuals",
            "subspace",
            "matching",
            "eigenvector",
        }
        rows = data["sections"]["eigenvalues"]
        assert all(row["fd_rel_diff"] < 1e-4 for row in rows)
        assert data["sections"]["eigenvector"]["holds"] is True

    def test_multi_mode_uses_span_residual(self, capsys):
        """Test that three modes are certified with sin^2 = 6 / (8 + eta^2)."""
        code, data = run_json(capsys, ["string", "--eta", "1", "--modes", "3", "--mesh", "1000"])
        assert code == EXIT_OK
        span = data["sections"]["subspace"]
        assert span["modes"] == [1, 2, 3]
        assert span["sin_sq"] == pytest.approx(2.0 / 3.0, rel=1e-8)
        assert span["sin_sq"] > max(row["sin_sq"] for row in data["sections"]["residuals"])
        for row in data["sections"]["matching"]:
            assert row["within_bound"] is True
            assert row["rel_error"] <= span["sin_theta"] + 1e-12

    def test_small_eta_skips_eigenvector(self, capsys):
        """Test that eta < 2 has no eigenvector section."""
        code, data = run_json(capsys, ["string", "--eta", "1", "--mesh", "1000"])
        assert code == EXIT_OK
        assert "eigenvector" not in data["sections"]

    def test_rejects_nonpositive_eta(self):
        """Test that eta must be positive."""
        assert main(["string", "--eta", "0"]) == EXIT_USAGE


class TestParser:
    """Tests for argument handling."""

    def test_unknown_command(self):
        """Test that argparse errors use exit code 1."""
        with pytest.raises(SystemExit) as exc:
            main(["nonsense"])
        assert exc.value.code == EXIT_USAGE

    def test_selfcheck(self, capsys):
        """Test a short selfcheck run."""
        code, data = run_json(capsys, ["selfcheck", "--count", "1", "--seed", "3"])
        assert code == EXIT_OK
        assert data["metadata"]["seed"] == 3
        assert all(row["failed"] == 0 for row in data["sections"]["properties"])

    def test_bad_tolerance(self):
        """Test that a non-positive tolerance is a usage error."""
        assert main(["table1", "--sym-tol", "-1"]) == EXIT_USAGE


SCHEMA_PATH = Path(__file__).parent.parent / "docs" / "report-v1.schema.json"
JSON_TYPES = {
    "object": dict,
    "array": list,
    "string": str,
    "integer": int,
    "number": (int, float),
    "boolean": bool,
}


def is_scalar(value) -> bool:
    return value is None or isinstance(value, (bool, int, float, str))


def assert_matches_schema(data: dict, schema: dict) -> None:
    """Check a report against the required keys, consts, enums and value shapes of the schema."""
    props = schema["properties"]
    assert set(schema["required"]) <= set(data)
    assert set(data) <= set(props)
    assert data["schema"] == props["schema"]["const"]
    assert data["command"] in props["command"]["enum"]
    assert data["status"] in props["status"]["enum"]

    meta_schema = props["metadata"]
    assert set(meta_schema["required"]) <= set(data["metadata"])
    for key, rule in meta_schema["properties"].items():
        if key not in data["metadata"]:
            continue
        value = data["metadata"][key]
        allowed = rule["type"] if isinstance(rule["type"], list) else [rule["type"]]
        assert any(
            value is None if t == "null" else isinstance(value, JSON_TYPES[t]) for t in allowed
        ), key
    assert isinstance(data["metadata"]["seed"], int) and data["metadata"]["seed"] >= 0

    for name, content in data["sections"].items():
        rows = content if isinstance(content, list) else [content]
        for row in rows:
            assert isinstance(row, dict), name
            for key, value in row.items():
                if isinstance(value, list):
                    assert all(is_scalar(v) for v in value), (name, key)
                else:
                    assert is_scalar(value), (name, key)
    assert all(isinstance(note, str) for note in data["notes"])


class TestReportSchema:
    """Tests that every command writes JSON matching docs/report-v1.schema.json."""

    @pytest.fixture(scope="class")
    def schema(self):
        """The loaded report schema."""
        return json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))

    def test_table1(self, capsys, schema):
        """Test the table1 report."""
        _, data = run_json(capsys, ["table1", "--eta-list", "1,2,3,4,5"])
        assert_matches_schema(data, schema)

    def test_bounds(self, capsys, schema, factor_file, e1_file):
        """Test the bounds report."""
        _, data = run_json(capsys, ["bounds", "--matrix", str(factor_file), "--basis", str(e1_file)])
        assert_matches_schema(data, schema)

    def test_not_applicable(self, capsys, schema, ones_file, e1_file):
        """Test the truncated bounds report."""
        _, data = run_json(capsys, ["bounds", "--matrix", str(ones_file), "--basis", str(e1_file)])
        assert_matches_schema(data, schema)

    def test_string(self, capsys, schema):
        """Test the string report."""
        _, data = run_json(capsys, ["string", "--eta", "10", "--modes", "2", "--mesh", "1000"])
        assert_matches_schema(data, schema)

    def test_selfcheck(self, capsys, schema):
        """Test the selfcheck report."""
        _, data = run_json(capsys, ["selfcheck", "--count", "1"])
        assert_matches_schema(data, schema)
