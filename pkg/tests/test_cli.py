import json
import subprocess
import sys

import pytest

from kronsync import __version__
from kronsync.cli import main
from kronsync.io_ingest import graph_document, serialize_graph
from kronsync.graph_core import PowerGraph


@pytest.fixture
def path_json(tmp_path, path_graph):
    p = tmp_path / "path.json"
    p.write_text(serialize_graph(path_graph))
    return str(p)


def read(tmp_path, name):
    return json.loads((tmp_path / name).read_text())


def test_version(capsys):
    assert main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_usage_errors():
    assert main([]) == 64
    assert main(["reduce"]) == 64
    assert main(["optimize", "case30", "--alpha", "abc"]) == 64
    assert main(["frobnicate"]) == 64


def test_reduce_path(tmp_path, path_json, capsys):
    assert main(["reduce", path_json, "--out", str(tmp_path)]) == 0
    doc = read(tmp_path, "reduced.json")
    assert doc["schema_version"] == 1
    # node 2 hangs off generator 1, so only the weight-2 line remains
    assert doc["r_tot_reduced"] == pytest.approx(0.5)
    assert doc["reduced_laplacian"][0][1] == pytest.approx(-2.0)
    assert "R_tot" in capsys.readouterr().out


def test_disconnected_input(tmp_path, path_graph):
    doc = graph_document(path_graph)
    doc["n"] = 4
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    assert main(["reduce", str(p), "--out", str(tmp_path)]) == 2


def test_missing_file(tmp_path):
    assert main(["reduce", str(tmp_path / "nope.m"), "--out", str(tmp_path)]) == 2


def test_optimize_writes_results(tmp_path, path_json):
    assert main(["optimize", path_json, "--alpha", "10", "--out", str(tmp_path)]) == 0
    doc = read(tmp_path, "optimization.json")
    assert doc["x_star"] == pytest.approx([10.0, 0.0], abs=1e-6)
    assert (tmp_path / "optimization.csv").read_text().startswith("i,j,x\n")


def test_optimize_infeasible(tmp_path, path_json):
    code = main(["optimize", path_json, "--alpha", "10", "--gamma", "0.7853981633974483",
                 "--psi", "4", "--out", str(tmp_path)])
    assert code == 3


def test_optimize_needs_alpha(tmp_path, path_json):
    assert main(["optimize", path_json, "--out", str(tmp_path)]) == 2


def test_certify(tmp_path, path_json):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"p": [0.5, 0.0, -0.5]}))
    assert main(["certify", path_json, "--gamma", "0.785", "--p-file", str(p), "--out", str(tmp_path)]) == 0
    doc = read(tmp_path, "certificate.json")
    assert doc["certificates"]["exact"]["holds"]
    assert main(["certify", path_json, "--gamma", "0.7853981633974483", "--psi", "4",
                 "--alpha", "10", "--out", str(tmp_path)]) == 3
    doc = read(tmp_path, "certificate.json")
    assert doc["design"]["feasible"] is False
    assert doc["design"]["max_lambda2"] == pytest.approx(8.5, abs=1e-6)


def test_certify_unbalanced(tmp_path, path_json):
    p = tmp_path / "p.json"
    p.write_text(json.dumps([1.0, 0.0, 0.0]))
    assert main(["certify", path_json, "--gamma", "0.7", "--p-file", str(p), "--out", str(tmp_path)]) == 2


def test_simulate_and_numerical_failure(tmp_path):
    g = PowerGraph(3, ((0, 2, 1.0), (1, 2, 1.0)), (0, 1), injections=(0.75, 0.75, -1.5))
    gp = tmp_path / "g.json"
    gp.write_text(serialize_graph(g))
    u = tmp_path / "u.json"
    u.write_text(json.dumps({"u0": [0.01, -0.01]}))
    assert main(["simulate", str(gp), "--u0-file", str(u), "--horizon", "1", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,delta_0,delta_1,omega_0,omega_1" and len(lines) == 102
    assert read(tmp_path, "simulation.json")["norm_omega"] > 0
    u.write_text(json.dumps([3.0, -3.0]))
    assert main(["simulate", str(gp), "--u0-file", str(u), "--horizon", "5", "--out", str(tmp_path)]) == 4


def test_montecarlo_variants(tmp_path, path_json):
    code = main(["montecarlo", "--variant", f"a={path_json}", "--variant", f"b={path_json}",
                 "-N", "3", "--horizon", "2", "--dt", "0.05", "--out", str(tmp_path)])
    assert code == 0
    doc = read(tmp_path, "montecarlo.json")
    assert doc["comparisons"]["b"]["omega_tilde"]["win_rate"] == 0.5
    assert len((tmp_path / "montecarlo.csv").read_text().splitlines()) == 7


def test_montecarlo_strategies(tmp_path, path_json):
    code = main(["montecarlo", path_json, "--strategies", "optimal,uniform", "--alpha", "3",
                 "-N", "4", "--horizon", "5", "--out", str(tmp_path)])
    assert code == 0
    assert read(tmp_path, "montecarlo.json")["comparisons"]["uniform"]["omega_tilde"]["win_rate"] == 1.0
    assert main(["montecarlo", path_json, "--strategies", "bogus", "--out", str(tmp_path)]) == 2


def test_sweep(tmp_path, path_json):
    assert main(["sweep", path_json, "--alpha", "10", "--gamma", "0.7853981633974483", "0.4",
                 "--psi-step", "0.05", "--stride", "20", "--out", str(tmp_path)]) == 0
    doc = read(tmp_path, "sweep.json")
    assert doc["gammas"][0]["psi_max"] == pytest.approx(3.45)
    assert doc["gammas"][1]["psi_max"] < 3.45
    assert (tmp_path / "sweep.csv").read_text().startswith("gamma,psi,feasible,r_tot_reduced,objective\n")


def test_console_script(tmp_path):
    out = subprocess.run([sys.executable, "-m", "kronsync.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and __version__ in out.stdout
