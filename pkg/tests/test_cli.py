import csv
import io
import json

import pytest

from compdim.cli import parse_deltas, parse_theta, run
from compdim.setforge import loads_set


@pytest.fixture
def specs(tmp_path):
    paths = {}
    for name, text in {
        "family1": "family = power_law_telescoping\np = 2.0\n",
        "family2": "family = dyadic_block_geometric\ntau = 0.3333333333333333\n",
        "bad": "family = explicit_finite\nterms = 0.4, 0.2, 0.25, 0.1\nnormalize = true\n",
        "short": "family = explicit_finite\nterms = 0.5, 0.3, 0.2\n",
    }.items():
        p = tmp_path / f"{name}.txt"
        p.write_text(text)
        paths[name] = str(p)
    return paths


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def rows_of(text):
    return list(csv.DictReader(line for line in text.splitlines() if not line.startswith("#")))


def test_dims_family1(specs):
    code, out, _ = call("dims", "--seq", specs["family1"], "--no-timestamp")
    assert code == 0
    rows = rows_of(out)
    upper = [r for r in rows if r["kind"] == "box_upper"]
    assert len(upper) == 1 and abs(float(upper[0]["value"]) - 0.5) < 1e-3
    kinds = {r["kind"] for r in rows}
    assert {"box_lower", "hausdorff", "assouad", "lower_assouad", "interm_cantor_upper",
            "interm_countable_upper", "interm_countable_lower"} <= kinds


def test_sweep_theta_family2(specs):
    code, out, _ = call("sweep-theta", "--seq", specs["family2"], "--no-timestamp",
                        "--theta", "0.25,0.5,0.75,1")
    assert code == 0
    rows = rows_of(out)
    assert [float(r["theta"]) for r in rows] == [0.25, 0.5, 0.75, 1.0]
    for r in rows:
        assert all(r[k] != "" for k in r)
        assert float(r["lower_cantor"]) == pytest.approx(0.6309, abs=1e-3)
        assert float(r["upper_cantor"]) == pytest.approx(0.6309, abs=1e-3)


def test_validate_non_monotone(specs):
    code, out, err = call("validate", "--seq", specs["bad"])
    assert code == 2 and out == ""
    rec = json.loads(err)
    assert rec["exit_code"] == 2 and rec["index"] == 3


def test_validate_report(specs):
    code, out, _ = call("validate", "--seq", specs["family2"], "--window", "1:32",
                        "--no-timestamp")
    assert code == 0
    row = rows_of(out)[0]
    assert float(row["inf_ratio"]) == pytest.approx(3.0, abs=1e-9)


def test_infeasible_target_exit_4(specs):
    code, _, err = call("maintheo-check", "--seq", specs["family1"], "--theta", "0.5",
                        "--t", "0.25")
    assert code == 4 and json.loads(err)["exit_code"] == 4


def test_precision_refusal_exit_3(specs):
    code, _, err = call("construct", "--seq", specs["family2"], "--which", "cantor",
                        "--depth", "40")
    assert code == 3 and json.loads(err)["error"] == "PrecisionError"


@pytest.mark.parametrize("argv", [
    ["dims"],
    ["dims", "--seq", "/nonexistent/spec.txt"],
    ["cover-estimate", "--seq", "SPEC", "--deltas", "0.01,0.1"],
    ["dims", "--seq", "SPEC", "--theta", "1.5"],
    ["construct", "--seq", "SPEC", "--which", "mixed"],
    ["nonsense"],
])
def test_errors_are_records(specs, argv):
    argv = [specs["family1"] if a == "SPEC" else a for a in argv]
    code, _, err = call(*argv)
    assert code == 2
    rec = json.loads(err)
    assert {"error", "exit_code", "message"} <= set(rec)


def test_byte_identical_without_timestamp(specs):
    argv = ["cover-estimate", "--seq", specs["family2"], "--which", "cantor",
            "--theta", "0.5,1", "--deltas", "0.05,0.01", "--no-timestamp"]
    first = call(*argv)[1]
    assert first == call(*argv, "--threads", "2")[1]
    assert not first.startswith("#")
    stamped = call(*argv[:-1])[1]
    assert stamped.startswith("# generated ")


def test_json_lines(specs):
    code, out, _ = call("sweep-theta", "--seq", specs["family1"], "--theta", "0.5",
                        "--format", "json-lines", "--no-timestamp")
    assert code == 0
    recs = [json.loads(line) for line in out.splitlines()]
    assert len(recs) == 1
    assert recs[0]["upper_countable"] == pytest.approx(1 / 3, abs=1e-12)


def test_construct_writes_set(specs, tmp_path):
    dump = tmp_path / "set.txt"
    out_csv = tmp_path / "report.csv"
    code, out, _ = call("construct", "--seq", specs["family1"], "--which", "mixed",
                        "--theta", "0.5", "--t", "0.42", "--depth", "6", "--count", "200",
                        "--set-out", str(dump), "--out", str(out_csv), "--no-timestamp")
    assert code == 0 and out == ""
    row = rows_of(out_csv.read_text())[0]
    assert row["gaps_ok"] == "True" and int(row["gaps_checked"]) == 100
    iset = loads_set(dump.read_text())
    assert len(iset) == int(row["components"])


def test_maintheo_check(specs):
    code, out, _ = call("maintheo-check", "--seq", specs["family1"], "--theta", "0.5",
                        "--t", "0.42", "--deltas", "1e-2,1e-3", "--no-timestamp")
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 2
    assert abs(float(rows[-1]["error"])) < 0.1


def test_parsers():
    assert parse_theta("0.25:1:4") == [0.25, 0.5, 0.75, 1.0]
    assert parse_theta("0.5") == [0.5]
    assert parse_deltas("0.1, 0.01") == [0.1, 0.01]
