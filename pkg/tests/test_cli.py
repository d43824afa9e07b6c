"""Tests for cli.py."""

import csv
import io
import json

import pytest

from wdvvroots.cli import RunConfig, build_parser, main, parse_multiplicities, serialize_report
from wdvvroots.errors import WdvvError
from wdvvroots.utils import load_report


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    monkeypatch.setenv("WDVV_WORKERS", "1")


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def test_table_b4(capsys):
    code, report = run_json(capsys, "table", "--system", "B4")
    assert code == 0
    assert report["schema_version"] == 1
    assert report["command"] == "table"
    (record,) = report["systems"]
    assert record["c_oracle"] == "20/1"
    assert record["c_table"] == "20/1"
    assert record["verdict"] == "match"
    assert record["residual"] == "0/1"
    assert record["full_sum_zero"] is True


def test_table_c2_rational_format(capsys):
    _, report = run_json(capsys, "table", "--system", "C2")
    assert report["systems"][0]["c_oracle"] == "32/1"


def test_table_g2_has_no_entry(capsys):
    code, report = run_json(capsys, "table", "--system", "G2")
    assert code == 0
    record = report["systems"][0]
    assert record["verdict"] == "no_table_entry"
    assert record["c_oracle"] == "240/1"
    assert record["c_table"] is None


def test_table_mismatch_is_a_finding(capsys):
    code, report = run_json(capsys, "table", "--system", "A2")
    assert code == 0
    record = report["systems"][0]
    assert record["verdict"] == "mismatch"
    assert record["finding"] is True
    assert record["c_closed_form"] == "6/1"


def test_table_all(capsys):
    code, report = run_json(capsys, "table", "--system", "all")
    assert code == 0
    labels = [r["system"] for r in report["systems"]]
    assert len(labels) == 25
    mismatches = {r["system"] for r in report["systems"] if r["verdict"] == "mismatch"}
    assert {"A2", "A3", "E6", "E8"} <= mismatches
    assert "D3" not in mismatches and "E7" not in mismatches
    a1 = next(r for r in report["systems"] if r["system"] == "A1")
    assert a1["note"] == "rank 1: c undefined"


def test_table_md(capsys):
    code, out = run(capsys, "table", "--system", "B2", "--format", "md")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "| system | c_oracle | c_table | verdict | residual |"
    assert lines[1] == "|---|---|---|---|---|"
    assert lines[2] == "| B2 | 4/1 | 4/1 | match | 0/1 |"


def test_verify_hypotheses(capsys):
    half, _ = run(capsys, "verify", "--system", "B2", "--gamma-hypothesis", "half", "--samples", "3")
    full, _ = run(capsys, "verify", "--system", "B2", "--gamma-hypothesis", "full", "--samples", "3")
    assert (half, full) == (0, 1)


def test_verify_scan_selects_half(capsys):
    code, report = run_json(capsys, "verify", "--system", "F4")
    assert code == 0
    record = report["systems"][0]
    assert record["hypothesis"] == "half"
    assert float(record["max_commutator_residual"]) < 1e-9
    assert len(record["points"]) == 10
    assert float(record["scan"]["full"]) > 1e-3


def test_verify_a1(capsys):
    code, report = run_json(capsys, "verify", "--system", "A1", "--samples", "2")
    assert code == 0
    assert report["systems"][0]["note"] == "rank 1: WDVV vacuous"


def test_verify_with_multiplicities(capsys):
    code, report = run_json(capsys, "verify", "--system", "B2", "--k", "short=2,long=3", "--samples", "3")
    assert code == 0
    assert report["systems"][0]["c"] == "24/1"
    assert report["config"]["k"] == {"long": "3/1", "short": "2/1"}


def test_verify_csv(capsys):
    code, out = run(capsys, "verify", "--system", "B2", "--samples", "2", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["system", "point", "i", "j", "residual"]
    assert len(rows) == 1 + 2 * 3
    assert rows[1][:4] == ["B2", "0", "1", "2"]


def test_deterministic_output(capsys):
    _, first = run(capsys, "verify", "--system", "G2", "--samples", "3", "--seed", "7")
    _, second = run(capsys, "verify", "--system", "G2", "--samples", "3", "--seed", "7")
    assert first == second


def test_dunkl(capsys):
    code, report = run_json(capsys, "dunkl", "--system", "B2", "--samples", "2")
    assert code == 0
    record = report["systems"][0]
    assert record["outcome"] == "fiberwise"
    assert record["pairs"] == 16
    assert record["aggregate_exact"] is True


def test_gamma_scan(capsys):
    code, report = run_json(capsys, "gamma-scan", "--system", "C3", "--samples", "3")
    assert code == 0
    record = report["systems"][0]
    assert record["verdict"] == "half"
    assert record["passing"] == ["half"]


def test_gamma_scan_rank_one_is_usage_error(capsys):
    code, _ = run(capsys, "gamma-scan", "--system", "A1")
    assert code == 2


def test_cpoly(capsys):
    code, report = run_json(capsys, "cpoly", "--system", "B2", "--k", "short=2,long=3")
    assert code == 0
    record = report["systems"][0]
    assert record["coefficients"] == {"short*short": "0/1", "short*long": "4/1", "long*long": "0/1"}
    assert record["c_at_k"] == "24/1"


def test_output_file(capsys, tmp_path):
    path = tmp_path / "report.json"
    code, out = run(capsys, "table", "--system", "D4", "--output", str(path))
    assert code == 0
    assert out == ""
    assert load_report(path)["systems"][0]["c_oracle"] == "16/1"


@pytest.mark.parametrize(
    "argv",
    [
        ["table", "--system", "H3"],
        ["table", "--system", "E9"],
        ["verify", "--system", "B2", "--samples", "0"],
        ["verify", "--system", "B2", "--k", "short"],
        ["verify", "--system", "A2", "--k", "short=2"],
        ["verify", "--system", "B2", "--k", "short=x"],
        ["launch"],
        ["verify", "--format", "xml"],
    ],
)
def test_usage_errors(capsys, argv):
    assert main(argv) == 2


def test_invalid_worker_count(capsys, monkeypatch):
    monkeypatch.setenv("WDVV_WORKERS", "many")
    assert main(["table", "--system", "B2"]) == 2


def test_parse_multiplicities():
    assert parse_multiplicities("short=1/2, long=3") == (("long", 3), ("short", 0.5))
    with pytest.raises(WdvvError):
        parse_multiplicities("=2")


def test_run_config_defaults():
    config = RunConfig.from_args(build_parser().parse_args(["verify", "--system", "B2"]))
    assert (config.samples, config.seed, config.margin, config.tolerance) == (10, 42, 0.2, 1e-9)
    assert config.gamma_hypothesis == "scan"
    assert config.format == "json"
    assert config.weights is None


def test_serialize_unknown_format():
    with pytest.raises(ValueError):
        serialize_report({"command": "table", "systems": []}, "yaml")
