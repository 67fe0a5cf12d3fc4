import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from qmgerbe.cli import main

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def run(*argv):
    return main([str(a) for a in argv])


def test_cocycle_scenario(tmp_path):
    assert run("cocycle", "--scenario", SCENARIOS / "cocycle_free.json", "--out", tmp_path) == 0
    out = json.loads((tmp_path / "cocycle.json").read_text())
    assert out["S_loop"] == 11.0
    assert out["per_segment_actions"] == [0.5, 0.5, 0.5, 4.5, 4.5, 0.5]


def test_trivialise_linear_csv(tmp_path):
    assert run("trivialise", "--scenario", SCENARIOS / "trivialise_linear.json", "--out", tmp_path) == 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "trivialise.csv").read_text())))
    assert rows
    data = json.loads((SCENARIOS / "trivialise_linear.json").read_text())
    k = data["kernel"]
    m, hbar, F = k.get("m", 1.0), k.get("hbar", 1.0), k["F"]
    t1, t12, t2 = data["times"]
    for row in rows:
        q = float(row["q12"])
        phase = sum(-(F**2) * dt**3 / (6 * m) + F * q * dt for dt in (t12 - t1, t2 - t12)) / hbar
        assert abs(np.angle(np.exp(1j * (float(row["phase_closed"]) - phase)))) < 1e-12
        assert float(row["abs_error"]) < 1e-5


def test_trivialise_from_flags(capsys):
    assert run("trivialise", "--kind", "linear", "--params", "m=1,hbar=1,F=1", "--q12-grid", "-1:1:3") == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "q12,phase_closed,phase_numeric,abs_error"
    assert [float(x.split(",")[0]) for x in lines[1:]] == [-1.0, 0.0, 1.0]
    assert float(lines[2].split(",")[1]) == pytest.approx(-1 / 3)


@pytest.mark.parametrize(
    "name",
    [
        "propagator_harmonic",
        "compose_linear",
        "trivialise_harmonic",
        "connection_exact",
        "stokes_cubic",
        "charclass_closed",
        "charclass_gluing",
        "charclass_cocycle",
    ],
)
def test_passing_scenarios(tmp_path, name):
    cmd = name.split("_")[0]
    assert run(cmd, "--scenario", SCENARIOS / f"{name}.json", "--out", tmp_path) == 0
    assert len(list(tmp_path.iterdir())) == 1


def test_failing_check_exits_one(tmp_path):
    assert run("connection", "--scenario", SCENARIOS / "connection_perturbed.json", "--out", tmp_path) == 1
    report = json.loads((tmp_path / "connection.json").read_text())
    assert report["passed"] is False


def test_outputs_are_byte_identical(tmp_path):
    for sub in ("a", "b"):
        assert run("trivialise", "--scenario", SCENARIOS / "trivialise_harmonic.json", "--out", tmp_path / sub) == 0
        assert run("stokes", "--scenario", SCENARIOS / "stokes_cubic.json", "--out", tmp_path / sub) == 0
    for name in ("trivialise.csv", "stokes.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_malformed_scenario(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "loop": {\n    "kernel": {"kind": "free"},\n    "anchors": [0, 1],\n'
                   '    "midpoint": 0, "times": [0,1,2,3,4,5,6,7,8]\n  }\n}\n')
    assert run("cocycle", "--scenario", bad) == 2
    err = capsys.readouterr().err
    assert f"{bad}:4:" in err and "loop/anchors" in err


def test_broken_json(tmp_path, capsys):
    bad = tmp_path / "broken.json"
    bad.write_text('{"kernel": {"kind": "free"},\n "p1": }\n')
    assert run("propagator", "--scenario", bad) == 2
    assert f"{bad}:2:" in capsys.readouterr().err


def test_physics_errors_exit_two(tmp_path, capsys):
    s = tmp_path / "caustic.json"
    s.write_text(json.dumps({"kernel": {"kind": "harmonic", "omega": 1.0}, "p1": {"q": 0, "t": 0}, "p2": {"q": 1, "t": np.pi}}))
    assert run("propagator", "--scenario", s) == 2
    assert "caustic" in capsys.readouterr().err


def test_time_order_error_is_named(tmp_path, capsys):
    data = json.loads((SCENARIOS / "cocycle_free.json").read_text())
    data["loop"]["times"][3] = data["loop"]["times"][2]
    s = tmp_path / "order.json"
    s.write_text(json.dumps(data))
    assert run("cocycle", "--scenario", s) == 2
    assert "t_a2" in capsys.readouterr().err


def test_bad_flags():
    assert run("trivialise", "--kind", "linear", "--params", "F") == 2
    assert run("trivialise", "--kind", "linear", "--params", "F=1", "--q12-grid", "0:1") == 2
    assert run("propagator") == 2
    assert run("verify", "--suite", "42") == 2
    assert run("cocycle", "--scenario", SCENARIOS / "cocycle_free.json", "--eps", "-1") == 2
    with pytest.raises(SystemExit) as exc:
        run("nonsense")
    assert exc.value.code == 2


def test_verify_subset(tmp_path):
    assert run("verify", "--suite", "1,6", "--out", tmp_path) == 0
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["passed"] and [c["criterion"] for c in report["criteria"]] == [1, 6]


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "qmgerbe", "cocycle", "--scenario", str(SCENARIOS / "cocycle_free.json")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["S_loop"] == 11.0
