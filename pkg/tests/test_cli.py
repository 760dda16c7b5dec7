import json
import subprocess
import sys

import pytest

from cyconekit.cli import EXIT_USAGE, UsageError, main, run

from conftest import DATA

CONES = DATA / "cones"


def steps(rep):
    return {s.name: s for s in rep.steps}


def cli_json(argv, capsys):
    status = main(list(argv) + ["--json"])
    out = capsys.readouterr().out
    return status, out, json.loads(out)


def test_malformed_cone_exits_2(capsys):
    assert main(["classify-toric", str(CONES / "malformed.cone")]) == 2
    assert "ParseError" in capsys.readouterr().out


def test_usage_errors_exit_64(capsys):
    assert main(["bogus"]) == EXIT_USAGE
    assert main([]) == EXIT_USAGE
    assert main(["sasaki", "typeI", "--dim", "2", "--weights", "2,x"]) == EXIT_USAGE
    assert main(["linearize", "cocycle", "--map", "x"]) == EXIT_USAGE
    with pytest.raises(UsageError):
        run(["reeb", "minimize"])


def test_unreadable_input_is_a_usage_error(capsys, tmp_path):
    assert main(["cone", str(tmp_path / "nope.cone")]) == EXIT_USAGE
    assert "cannot read" in capsys.readouterr().err


def test_json_is_byte_identical_across_runs(capsys):
    argv = ["classify-toric", str(CONES / "conifold.cone")]
    _, a, _ = cli_json(argv, capsys)
    _, b, _ = cli_json(argv, capsys)
    assert a == b


def test_json_round_trips():
    rep, _ = run(["classify-toric", str(CONES / "dp2.cone")])
    doc = rep.as_dict()
    assert json.loads(rep.to_json()) == doc
    assert json.loads(json.dumps(json.loads(rep.to_json()), sort_keys=True, indent=2)) == doc


def test_classify_conifold(capsys):
    status, _, doc = cli_json(["classify-toric", str(CONES / "conifold.cone")], capsys)
    assert status == 0 and doc["ok"]
    by = {s["name"]: s for s in doc["steps"]}
    assert by["toric_ideal"]["result"]["quadrics"] == 1
    assert [float(x) for x in by["minimize_volume"]["result"]["xi_star"]] == [3, 1.5, 1.5]
    assert by["rigidity"]["result"]["verdict"] == "Smoothable(1)"
    assert by["xi_weight"]["result"]["limit"] == "-3"
    tri = by["enumerate_crepant"]["result"]
    assert tri["count"] == 2 and tri["regular"] == [True, True] and tri["flip_graph_connected"]
    assert by["terminal_partial"]["result"]["odp_cells"] == 1


def test_classify_c3z3():
    rep, status = run(["classify-toric", str(CONES / "c3z3.cone")])
    assert status == 0
    s = steps(rep)
    assert s["rigidity"].result["verdict"] == "Rigid"
    assert s["enumerate_crepant"].result["count"] == 1
    # a rigid cone has nothing to weigh; recorded, not failed
    assert s["xi_weight"].ok and s["xi_weight"].error.startswith("NoDeformation")


def test_wproj_fiber(capsys):
    status, _, doc = cli_json(["wproj", "fiber", str(DATA / "ideals" / "cusp.ideal"), "--t", "1"], capsys)
    assert status == 0
    by = {s["name"]: s for s in doc["steps"]}
    res = by["fiber_divisor_at_infinity"]["result"]
    assert res["equal"] is True and res["affine_fiber_smooth"] is True


def test_sasaki_is_deterministic(capsys):
    argv = ["sasaki", "typeI", "--dim", "2", "--weights", "2,1", "--samples", "100", "--seed", "7"]
    s1, a, doc = cli_json(argv, capsys)
    s2, b, _ = cli_json(argv, capsys)
    assert s1 == s2 == 0 and a == b
    assert doc["steps"][0]["result"]["seed"] == 7


def test_linearize_commands():
    lin = DATA / "linearize"
    rep, status = run(["linearize", "block", "--matrix", str(lin / "order4.txt")])
    r = steps(rep)["block_diagonalize"].result
    assert status == 0 and r["order"] == 4 and not r["unitarized"]
    rep, _ = run(["linearize", "obstruction", "--matrix", str(lin / "shear.txt")])
    [g] = steps(rep)["finite_order_obstruction"].result["growth"]
    assert g["slope"] == 1
    rep, status = run(["linearize", "cocycle", "--map", str(lin / "F_counter.txt"),
                       "--gA", str(lin / "gA_counter.txt"), "--gB", str(lin / "gB_counter.txt")])
    assert status == 0 and steps(rep)["abt_cocycle_check"].result["residual"] == 2
    rep, status = run(["linearize", "average", "--map", str(lin / "involution.txt"), "--jet", "2"])
    assert steps(rep)["average_jet"].result["group_order"] == 2
    rep, status = run(["linearize", "block", "--matrix", str(lin / "shear.txt")])
    assert status != 0


def test_other_subcommands():
    rep, status = run(["resolve", "triangulations", str(CONES / "dp2.cone"), "--flops", "--regular"])
    assert status == 0 and steps(rep)["enumerate_crepant"].result["count"] == 5
    rep, status = run(["deform", "rigidity", str(CONES / "dp3.cone")])
    assert status == 0 and steps(rep)["rigidity"].result["parameters"] == 5
    rep, status = run(["cone", str(CONES / "dp1.cone")])
    assert status == 0 and steps(rep)["toric_ideal"].result["generators_by_degree"]["2"] == 20
    rep, status = run(["reeb", "approx", str(CONES / "dp2.cone"), "--count", "3"])
    assert status == 0 and len(steps(rep)["dirichlet_approximants"].result["approximants"]) == 3


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cyconekit.cli", "linearize", "block",
                           "--matrix", str(DATA / "linearize" / "order4.txt")],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0 and "status: ok" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "cyconekit.cli", "nope"], capture_output=True, timeout=120)
    assert proc.returncode == EXIT_USAGE
