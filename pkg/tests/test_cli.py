import json
import shutil
import subprocess
import sys

import pytest

from coiso_quant.cli import COMMANDS, main, resolve_scene, run
from coiso_quant.scenes import bundled_names, load_bundled


def _machine(capsys, *argv):
    code = main(list(argv) + ["--format", "machine"])
    out = capsys.readouterr().out
    return code, (json.loads(out) if code == 0 else None), out


def test_report_header(capsys):
    code, rep, _ = _machine(capsys, "obstruction", "--scene", "p1-in-t-star-p1-O(-1)")
    assert code == 0
    assert rep["tool"] == "coiso-quant" and rep["command"] == "obstruction"
    assert rep["results"]["verdict"] == "deformable"
    assert "seconds" not in json.dumps(rep)


def test_lagrangian_example(capsys):
    code, rep, _ = _machine(capsys, "lagrangian", "--scene", "p1-in-t-star-p1-O(-1)")
    assert code == 0 and rep["results"]["deformable"] is True


def test_check_coisotropic_certificate(capsys):
    code, rep, _ = _machine(capsys, "check-coisotropic", "--scene", "non-coisotropic-q1-p1-a4")
    assert code == 0
    assert rep["results"]["coisotropic"] == "false"
    assert rep["results"]["charts"]["U0"]["brackets"] == [{"pair": ["q1", "p1"], "normal_form": "1"}]


@pytest.mark.parametrize("name", ["t-star-a1-zero-section", "t-star-a2-zero-section", "hypersurface-q1-a4",
                                  "graph-lagrangian-q1sq-q2", "p1-in-t-star-p1-O(2)"])
def test_verify_associativity_passes(name):
    rep = run("verify-associativity", resolve_scene(name))
    assert rep.results["pass"]


def test_machine_output_is_deterministic(capsys, tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"r{k}.json"
        code, _, out = _machine(capsys, "audit", "--scene", "p1-kappa-in-t-star-p1-O(-2)", "--report", str(path))
        assert code == 0
        assert path.read_text() == out
        outs.append(out)
    assert outs[0] == outs[1]


def test_side_and_degree_flags(capsys):
    code, rep, _ = _machine(capsys, "obstruction", "--scene", "p1-kappa-in-t-star-p1-O(0)", "--side", "right")
    assert code == 0 and rep["side"] == "right" and rep["results"]["verdict"] == "deformable"
    code, rep, _ = _machine(capsys, "obstruction", "--scene", "p1-three-chart-O(0)", "--degree-bound", "5")
    assert code == 0 and rep["results"]["verdict"] == "obstructed-at-bound-5"


def test_side_flip_command(capsys):
    code, rep, _ = _machine(capsys, "side-flip", "--scene", "p1-kappa-in-t-star-p1-O(2)")
    assert code == 0
    assert rep["results"]["left"] == "obstructed" and rep["results"]["right"] == "obstructed"
    assert rep["results"]["flipped_scene"]["options"]["side"] == "right"


def test_h2_class(capsys):
    code, rep, _ = _machine(capsys, "h2-class", "--scene", "p1-three-chart-O(-1)")
    assert code == 0 and rep["results"]["verdict"] == "coboundary"
    code, rep, _ = _machine(capsys, "h2-class", "--scene", "p1-in-t-star-p1-O(0)")
    assert code == 0 and rep["results"]["computed"] is False


def test_precondition_exit_code(capsys):
    assert main(["lagrangian", "--scene", "hypersurface-q1-a4"]) == 2
    assert "dim Y" in capsys.readouterr().err


def test_scene_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{\"schema_version\": 1, \"charts\": []}")
    assert main(["obstruction", "--scene", str(bad)]) == 2
    assert "scene error" in capsys.readouterr().err


def test_unknown_command():
    with pytest.raises(SystemExit) as e:
        main(["frobnicate", "--scene", "t-star-a1-zero-section"])
    assert e.value.code == 2


def test_human_format(capsys):
    assert main(["curvature", "--scene", "t-star-a2-nonflat-connection"]) == 0
    out = capsys.readouterr().out
    assert "flat: false" in out and "s)" in out


def test_every_command_runs_on_t_star_a2():
    s = load_bundled("t-star-a2-zero-section")
    for command in COMMANDS:
        rep = run(command, s)
        json.loads(rep.machine())


def _check_expected(name):
    s = load_bundled(name)
    exp = s.expected
    if "coisotropic" in exp:
        rep = run("check-coisotropic", s).results
        assert rep["coisotropic"] == ("true" if exp["coisotropic"] else "false")
        if "certificate" in exp:
            got = {f"{b['pair'][0]},{b['pair'][1]}": b["normal_form"] for b in rep["charts"]["U0"]["brackets"]}
            assert got == exp["certificate"]
    if "jacobi" in exp:
        assert run("check-jacobi", s).results["charts"]["U0"]["defect"] == exp["jacobi"]
    if "obstruction" in exp:
        assert run("obstruction", s).results["verdict"] == exp["obstruction"]
    if "right_obstruction" in exp:
        assert run("obstruction", s, side="right").results["verdict"] == exp["right_obstruction"]
    if "lagrangian" in exp:
        assert run("lagrangian", s).results["verdict"] == exp["lagrangian"]
    if "obstruction_cocycle" in exp:
        got = run("obstruction", s).results["report"]["cocycle"]["components"]
        assert got == exp["obstruction_cocycle"]
    if "flat" in exp:
        conns = run("curvature", s).results["connections"]
        assert all(c["flat"] == exp["flat"] for c in conns.values())


@pytest.mark.parametrize("name", bundled_names())
def test_bundled_expected_verdicts(name):
    _check_expected(name)


@pytest.mark.skipif(shutil.which("coiso") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["coiso", "check-jacobi", "--scene", "non-jacobi", "--format", "machine"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["results"]["charts"]["U0"]["defect"] == {"x,y,z": "-z"}
    res = subprocess.run([sys.executable, "-m", "coiso_quant.cli", "list-scenes"], capture_output=True, text=True)
    assert "t-star-a1-zero-section" in res.stdout.split()
