import csv
import json
import shutil

import pytest

from peacegame import cli
from peacegame.errors import NumericFailure

from conftest import SCENARIO_DIR


def run(tmp_path, *argv):
    return cli.main([argv[0], "--out", str(tmp_path), "--reproducible", *argv[1:]])


def scenario(name):
    return str(SCENARIO_DIR / f"{name}.json")


def test_bribing_example(tmp_path, capsys):
    assert run(tmp_path, "bribing", "--scenario", scenario("uniform_example")) == 0
    out = capsys.readouterr().out
    report = json.loads((tmp_path / "implementability.json").read_text())["implementability"]
    assert report["b_star"] == pytest.approx(12.1762, rel=1e-4)
    assert repr(report["b_star"]) in out
    text = (tmp_path / "implementability.json").read_text() + (tmp_path / "security_witness.json").read_text()
    for line in out.splitlines()[1:]:
        value = line.split(None, 1)[1]
        for token in value.strip("[]").split(", "):
            assert token in text
    rows = list(csv.reader((tmp_path / "bribe_curve.csv").open()))
    assert rows[0] == ["b", "a2", "payoff"] and len(rows) == 202
    assert "timestamp" not in text


def test_timestamp_only_without_reproducible(tmp_path):
    assert cli.main(["bribing", "--scenario", scenario("uniform_example"), "--out", str(tmp_path), "--grid-n", "50"]) == 0
    assert "timestamp" in (tmp_path / "implementability.json").read_text()


def test_parse_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(tmp_path, "bribing", "--scenario", str(bad)) == 2
    assert run(tmp_path, "requesting", "--scenario", str(tmp_path / "missing.json")) == 2
    extra = tmp_path / "extra.json"
    extra.write_text(json.dumps({"f1": {"kind": "uniform", "lo": 0, "hi": 1},
                                 "f2": {"kind": "uniform", "lo": 0, "hi": 1}, "colour": "red"}))
    assert run(tmp_path, "bribing", "--scenario", str(extra)) == 2
    opts = tmp_path / "opts.json"
    opts.write_text(json.dumps({"f1": {"kind": "uniform", "lo": 0, "hi": 1},
                                "f2": {"kind": "uniform", "lo": 0, "hi": 1}, "options": {"speed": 3}}))
    assert run(tmp_path, "bribing", "--scenario", str(opts)) == 2
    inverted = tmp_path / "inverted.json"
    inverted.write_text(json.dumps({"f1": {"kind": "uniform", "lo": 5, "hi": 1},
                                    "f2": {"kind": "uniform", "lo": 0, "hi": 1}}))
    assert run(tmp_path, "bribing", "--scenario", str(inverted)) == 2


def test_options_from_scenario(tmp_path):
    src = json.loads((SCENARIO_DIR / "uniform_example.json").read_text())
    src["options"] = {"grid_n": 50, "curve_points": 11, "out": str(tmp_path / "nested")}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(src))
    assert cli.main(["bribing", "--scenario", str(path), "--reproducible"]) == 0
    rows = list(csv.reader((tmp_path / "nested" / "bribe_curve.csv").open()))
    assert len(rows) == 12
    meta = json.loads((tmp_path / "nested" / "implementability.json").read_text())["metadata"]
    assert meta["settings"]["grid_n"] == 50


def test_bribing_numeric_failure(tmp_path, monkeypatch, capsys):
    def boom(*a, **k):
        raise NumericFailure("no sign change", (1.0, 2.0))

    monkeypatch.setattr(cli.bribing, "implementability", boom)
    assert run(tmp_path, "bribing", "--scenario", scenario("uniform_example")) == 3
    assert "bracket=(1.0, 2.0)" in capsys.readouterr().err


def test_requesting(tmp_path, capsys):
    assert run(tmp_path, "requesting", "--scenario", scenario("requesting_example")) == 0
    rep = json.loads((tmp_path / "request_report.json").read_text())["request_report"]
    assert rep["cond_a"] is True and rep["cond_b"] is True
    assert run(tmp_path, "requesting", "--scenario", scenario("no_peace")) == 0
    rep = json.loads((tmp_path / "request_report.json").read_text())["request_report"]
    assert rep["exists"] is False and rep["cond_a"] is False
    rows = list(csv.reader((tmp_path / "request_curve.csv").open()))
    assert rows[0] == ["r", "alpha2", "payoff"]


def test_auction_point_mass(tmp_path):
    assert run(tmp_path, "auction", "--scenario", scenario("uniform_example"), "--point-mass", "50") == 0
    eq = json.loads((tmp_path / "auction.json").read_text())["equilibrium"]
    assert eq["x_sigma"] == pytest.approx(43.233, abs=1e-3)
    assert eq["c1"] == 0.0 and eq["c2"] == pytest.approx(0.13534, abs=1e-5)


def test_auction_symmetric_curves_identical(tmp_path):
    assert run(tmp_path, "auction", "--scenario", scenario("symmetric")) == 0
    rows = list(csv.reader((tmp_path / "auction_curve.csv").open()))[1:]
    assert all(r[1] == r[2] for r in rows)


def test_auction_verify_appends_oracle(tmp_path):
    src = json.loads((SCENARIO_DIR / "uniform_example.json").read_text())
    src["options"] = {"fp_types": 100, "fp_iters": 2000}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(src))
    assert run(tmp_path, "auction", "--scenario", str(path), "--point-mass", "50", "--verify") == 0
    body = json.loads((tmp_path / "auction.json").read_text())
    assert body["oracle"]["sup_norm_H2"] <= 0.05


def test_auction_nonconvergence_exit(tmp_path, capsys):
    assert run(tmp_path, "auction", "--scenario", scenario("requesting_example"), "--max-iter", "1") == 3
    assert "bracket" in capsys.readouterr().err


def test_verify(tmp_path):
    assert run(tmp_path, "verify", "--scenario", scenario("symmetric")) == 0
    body = json.loads((tmp_path / "verify.json").read_text())
    assert body["violations"] == []
    assert [row["grid_n"] for row in body["convergence"]] == [100, 200, 400]
    assert run(tmp_path, "verify", "--scenario", scenario("symmetric"), "--tol", "-1") == 1
    body = json.loads((tmp_path / "verify.json").read_text())
    assert body["violations"]


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "peacegame", "bribing", "--scenario", "/nonexistent"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
