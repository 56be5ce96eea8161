"""CLI surface: subcommands, exit codes, schema-valid deterministic output."""

import json
import math
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from oscillab.cli import main

SCHEMAS = Path(__file__).resolve().parents[1] / "schemas"

CANONICAL = {"n": 3, "t0": 0.0, "a": [["0", "1", "1"],
                                      ["-1", "0", "0"],
                                      ["-1", "0", "0"]]}
ROTATION = {"n": 2, "t0": 0.0, "a": [["0", "1"], ["-1", "0"]]}
DECAY = {"n": 3, "t0": 0.0, "a": [["-1", "0", "0"],
                                  ["0", "-1", "0"],
                                  ["0", "0", "-1"]]}
VANISHING_A12 = {"n": 3, "t0": 0.0,
                 "a": [["0", "(abs(t - 5) + (t - 5))/2", "1"],
                       ["-1", "0", "0"],
                       ["-1", "0", "0"]]}


@pytest.fixture
def sysfile(tmp_path):
    def write(doc, name="sys.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)
    return write


def schema(name):
    return json.loads((SCHEMAS / name).read_text())


def run_json(capsys, argv):
    rc = main(argv)
    out = capsys.readouterr().out
    return rc, json.loads(out), out


# --- reduce ------------------------------------------------------------------

def test_reduce_csv(sysfile, tmp_path, capsys):
    out = tmp_path / "red.csv"
    rc = main(["reduce", "--input", sysfile(CANONICAL),
               "--window", "0", "10", "--points", "5",
               "--output", str(out)])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "t,A,B3,C,nu3"
    assert lines[1] == "0,0,0,2,0"
    assert len(lines) == 6
    for line in lines[1:]:
        t, a, b3, c, nu3 = map(float, line.split(","))
        assert (a, b3, c, nu3) == (0.0, 0.0, 2.0, 0.0)


def test_reduce_routes_agree_for_canonical(sysfile, tmp_path):
    paths = []
    for route in ("display", "tilde"):
        out = tmp_path / f"{route}.csv"
        rc = main(["reduce", "--input", sysfile(CANONICAL),
                   "--route", route, "--points", "11", "--output", str(out)])
        assert rc == 0
        paths.append(out.read_text())
    assert paths[0] == paths[1]


# --- simulate ----------------------------------------------------------------

def test_simulate_canonical_zero_crossings(sysfile, tmp_path, capsys):
    traj_csv = tmp_path / "traj.csv"
    zeros_csv = tmp_path / "zeros.csv"
    rc, doc, _ = run_json(capsys, [
        "simulate", "--input", sysfile(CANONICAL), "--t-end", "60",
        "--events", "1", "--output", str(traj_csv),
        "--zeros-output", str(zeros_csv)])
    assert rc == 0
    assert doc["status"] == "completed" and doc["escape"] is None
    assert doc["zero_counts"] == {"phi1": 27}
    assert doc["samples"] >= 2

    lines = zeros_csv.read_text().strip().splitlines()
    assert lines[0] == "component,t"
    assert len(lines) == 28
    # phi1 = cos(sqrt(2) t): zeros at (k + 1/2) pi / sqrt(2)
    for i, line in enumerate(lines[1:]):
        comp, t = line.split(",")
        expected = (i + 0.5) * math.pi / math.sqrt(2.0)
        assert comp == "1" and abs(float(t) - expected) <= 1e-6

    header = traj_csv.read_text().splitlines()[0]
    assert header == "t,phi1,phi2,phi3"


def test_simulate_init_length_mismatch_is_usage_error(sysfile, capsys):
    rc = main(["simulate", "--input", sysfile(CANONICAL), "--init", "1,0"])
    assert rc == 1
    assert "components" in capsys.readouterr().err


# --- check -------------------------------------------------------------------

def test_check_verdicts_match_schema(sysfile, tmp_path, capsys):
    verdict_schema = schema("verdict.schema.json")
    runs = [
        (["check", "thm31-2", "--input", sysfile(CANONICAL)], "Holds"),
        (["check", "thm32", "--input", sysfile(CANONICAL)], "Fails"),
        (["check", "thm32", "--input", sysfile(DECAY, "d.json")], "Holds"),
        (["check", "thm23", "--input", sysfile(ROTATION, "r.json"),
          "--interval", "0", "3"], "Fails"),
        (["check", "thm22", "--input", sysfile(ROTATION, "r.json")], "Holds"),
    ]
    for argv, expected in runs:
        rc, doc, _ = run_json(capsys, argv)
        assert rc == 0, argv   # a Fails verdict is still a computed result
        assert doc["status"] == expected, argv
        jsonschema.validate(doc, verdict_schema)


def test_check_thm23_interval_integral(sysfile, capsys):
    rc, doc, _ = run_json(capsys, [
        "check", "thm23", "--input", sysfile(ROTATION),
        "--interval", "0", "3"])
    assert rc == 0
    integral = doc["witnesses"]["threshold_comparison"]["integral"]
    assert integral == pytest.approx(3.0, abs=1e-9)


def test_check_thm31_1_ladder_offsets(sysfile, capsys):
    rc, doc, _ = run_json(capsys, [
        "check", "thm31-1", "--input", sysfile(CANONICAL),
        "--t-ladder", "0,10", "--t-hi", "30"])
    assert rc == 0 and doc["status"] == "Holds"
    assert doc["parameters"]["t_ladder"] == [0.0, 10.0]


def test_check_output_file(sysfile, tmp_path):
    out = tmp_path / "verdict.json"
    rc = main(["check", "thm32", "--input", sysfile(DECAY),
               "--output", str(out)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["theorem"] == "thm32" and doc["status"] == "Holds"


# --- classify ----------------------------------------------------------------

def test_classify_canonical_and_schema(sysfile, capsys):
    rc, doc, text = run_json(capsys, [
        "classify", "--input", sysfile(CANONICAL), "--horizon", "60"])
    assert rc == 0
    assert doc["label"] == "OscillatoryEvidence"
    assert doc["bundle_size"] == 8 and doc["seed"] == 0
    jsonschema.validate(doc, schema("classification.schema.json"))

    rc2 = main(["classify", "--input", sysfile(CANONICAL),
                "--horizon", "60"])
    assert rc2 == 0
    assert capsys.readouterr().out == text   # same seed, same bytes


def test_classify_rejects_small_bundle(sysfile, capsys):
    rc = main(["classify", "--input", sysfile(CANONICAL),
               "--inits", "1,0,0;0,1,0"])
    assert rc == 1
    assert "8" in capsys.readouterr().err


# --- report ------------------------------------------------------------------

def test_report_canonical_sections(sysfile, capsys):
    rc, doc, _ = run_json(capsys, [
        "report", "--input", sysfile(CANONICAL), "--horizon", "60"])
    assert rc == 0
    sec = doc["sections"]
    assert sec["ratio_validation"]["status"] == "WellDefined"
    assert sec["checks"]["thm31-1"]["status"] == "Holds"
    assert sec["checks"]["thm31-2"]["status"] == "Holds"
    assert sec["checks"]["thm32"]["status"] == "Fails"
    assert sec["classification"]["label"] == "OscillatoryEvidence"
    cons = sec["remark_1_1_consistency"]
    assert cons["consistent"] is True
    assert "thm31-2" in cons["oscillatory_evidence"]
    assert doc["parameters"]["horizon"] == 60.0


def test_report_decay_consistency(sysfile, capsys):
    rc, doc, _ = run_json(capsys, [
        "report", "--input", sysfile(DECAY), "--horizon", "60"])
    assert rc == 0
    sec = doc["sections"]
    assert sec["checks"]["thm32"]["status"] == "Holds"
    assert sec["classification"]["label"] == "NonoscillatoryEvidence"
    cons = sec["remark_1_1_consistency"]
    assert cons["consistent"] is True
    assert set(cons["nonoscillatory_evidence"]) == {"thm32",
                                                    "classification"}
    assert cons["oscillatory_evidence"] == []


def test_report_vanishing_a12_skips_reduction_checks(sysfile, capsys):
    rc, doc, _ = run_json(capsys, [
        "report", "--input", sysfile(VANISHING_A12), "--horizon", "30"])
    assert rc == 0   # report never aborts on a Suspect system
    sec = doc["sections"]
    assert sec["ratio_validation"]["status"] == "Suspect"
    assert "Suspect" in sec["checks"]["thm31-1"]["skipped"]
    assert "Suspect" in sec["checks"]["thm31-2"]["skipped"]
    assert "status" in sec["checks"]["thm32"]


def test_report_n2_uses_planar_checks(sysfile, capsys):
    rc, doc, _ = run_json(capsys, [
        "report", "--input", sysfile(ROTATION), "--horizon", "40"])
    assert rc == 0
    sec = doc["sections"]
    assert sec["ratio_validation"] == {"skipped": "requires n >= 3"}
    assert sec["checks"]["thm22"]["status"] == "Holds"
    assert sec["checks"]["thm23"]["status"] == "Holds"
    assert sec["classification"]["label"] == "OscillatoryEvidence"


def test_report_deterministic_bytes(sysfile, tmp_path):
    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        rc = main(["report", "--input", sysfile(DECAY), "--horizon", "40",
                   "--output", str(out)])
        assert rc == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


# --- exit codes ---------------------------------------------------------------

def test_exit_codes(sysfile, tmp_path, capsys):
    assert main(["check", "thm31-2",
                 "--input", str(tmp_path / "missing.json")]) == 1
    assert main(["check", "nosuch", "--input", sysfile(CANONICAL)]) == 1
    assert main(["frobnicate"]) == 1
    assert main([]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 2, "t0": 0.0,
                               "a": [["0", "1+"], ["0", "0"]]}))
    assert main(["check", "thm31-2", "--input", str(bad)]) == 1
    assert main(["check", "thm32", "--input", sysfile(DECAY),
                 "--inits", "1,0,1"]) == 1
    capsys.readouterr()


def test_exit_code_numerical_failure(sysfile, capsys):
    # rhs hits log of a negative number on the very first step
    doc = {"n": 2, "t0": 0.0, "a": [["log(t - 1)", "1"], ["0", "0"]]}
    rc = main(["simulate", "--input", sysfile(doc), "--t-end", "2"])
    assert rc == 2
    assert "numerical failure" in capsys.readouterr().err


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "SUBCOMMAND" in capsys.readouterr().out
