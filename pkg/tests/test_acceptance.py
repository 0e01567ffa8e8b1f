"""Acceptance battery, run through the command line exactly as a user would.

Each test prints one PASS/FAIL line. The suite runs twice with the same
configuration; the two reports must match byte for byte.
"""

import json
import re
import subprocess
import sys

import pytest

ARGS = ["suite", "--grid", "2:2", "--k", "2", "--rounds", "2"]
# runtime ceilings in seconds
LIMITS = {1: 60, 2: 300}


def _run(path):
    proc = subprocess.run([sys.executable, "-m", "katetov.cli", *ARGS, "-o", str(path)],
                          capture_output=True, text=True, timeout=1800)
    timings = {int(m[1]): float(m[2]) for m in re.finditer(r"criterion (\d+):.*\((\d+\.\d+)s\)", proc.stderr)}
    return proc.returncode, path.read_bytes(), timings


@pytest.fixture(scope="module")
def suite_runs(tmp_path_factory):
    d = tmp_path_factory.mktemp("suite")
    return _run(d / "first.json"), _run(d / "second.json")


@pytest.fixture(scope="module")
def report(suite_runs):
    return json.loads(suite_runs[0][1])


def _criterion(report, n):
    return next(c for c in report["criteria"] if c["id"] == n)


def _say(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")


def test_criterion_1_extension_maximality(report, suite_runs, capsys):
    c = _criterion(report, 1)
    t = suite_runs[0][2].get(1, float("inf"))
    ok = c["passed"] and c["violations"] == 0 and t < LIMITS[1]
    _say(capsys, 1, ok, f"{c['spaces']} spaces, {c['comparisons']} comparisons, "
                        f"{c['violations']} violations, {t:.1f}s (limit {LIMITS[1]}s)")
    assert ok


def test_criterion_2_one_point_certification(report, suite_runs, capsys):
    c = _criterion(report, 2)
    t = suite_runs[0][2].get(2, float("inf"))
    ok = c["passed"] and c.get("witness_k", -1) >= 1 and c.get("rechecks_agree") and t < LIMITS[2]
    _say(capsys, 2, ok, f"params {c.get('params')}, {c.get('points')} points, witness_k={c.get('witness_k')}, "
                        f"rechecks agree={c.get('rechecks_agree')}, counterexample={c.get('counterexample')}, "
                        f"{t:.1f}s")
    assert ok


def test_criterion_3_isometry_oracle(report, capsys):
    c = _criterion(report, 3)
    ok = c["passed"] and c["spaces"] == 50 and c["mismatches"] == 0
    _say(capsys, 3, ok, f"{c['spaces']} spaces, {c['mismatches']} mismatches")
    assert ok


def test_criterion_4_one_anchor_refinement(report, capsys):
    c = _criterion(report, 4)
    ok = c["passed"] and c["failures"] == 0 and c["instances"] > 0
    _say(capsys, 4, ok, f"{c['instances']} instances over {len(c['approximants'])} certified approximants, "
                        f"{c['failures']} failures")
    assert ok


def test_criterion_5_neutrality_construction(report, capsys):
    c = _criterion(report, 5)
    ok = (c["passed"] and c["instances"] >= 10 and c["approximants_used"] >= 3
          and c["failures"] == 0 and c["corruptions_missed"] == 0)
    _say(capsys, 5, ok, f"{c['instances']} instances on {c['approximants_used']} approximants, "
                        f"{c['failures']} failures, {c['corruptions_missed']} undetected corruptions")
    assert ok


def test_criterion_6_displacement_bound(report, capsys):
    c = _criterion(report, 6)
    sampled = all(r["samples"] >= 1000 and r["violations"] == 0 for r in c["sampled"])
    ok = c["passed"] and c["exhaustive_violations"] == 0 and sampled and c["tightness"]["attained"]
    _say(capsys, 6, ok, f"{c['exhaustive_runs']} exhaustive runs, {len(c['sampled'])} sampled spaces, "
                        f"tightness sup={c['tightness']['max_sup']} at eps={c['tightness']['eps']}")
    assert ok


def test_criterion_7_reduction_chain(report, capsys):
    c = _criterion(report, 7)
    ok = c["passed"] and c["failures"] == 0 and c["instances"] > 0
    _say(capsys, 7, ok, f"{c['instances']} (G, A, V) instances, {c['failures']} failures")
    assert ok


def test_criterion_8_determinism(suite_runs, report, capsys):
    (code1, first, _), (code2, second, _) = suite_runs
    ok = first == second and code1 == code2 and _criterion(report, 8)["passed"]
    _say(capsys, 8, ok, f"two runs byte-identical={first == second}, exit codes {code1}/{code2}")
    assert ok


def test_suite_exit_code_matches_verdict(suite_runs, report):
    assert suite_runs[0][0] == (0 if report["passed"] else 1)
