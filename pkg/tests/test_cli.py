import json

import numpy as np
import pytest

from z2hc import __version__
from z2hc.cli import main
from z2hc.graph_core import complete_graph, random_connected_graph, torus_graph, write_graph

SMALL_SPEC = {
    "n_vertices": 9,
    "n_edges": [18],
    "samples_per_n_edges": 3,
    "schedule": {"g_step": 0.02, "t_step": 0.1, "substeps": 4, "endpoint": 1.0},
    "seed": 3,
    "window": 5,
}


@pytest.fixture
def graph_files(tmp_path):
    paths = {}
    for name, g in {"torus": torus_graph(3, 3), "k4": complete_graph(4), "tree": random_connected_graph(9, 8, 0)}.items():
        paths[name] = tmp_path / f"{name}.graph"
        write_graph(g, paths[name])
    return paths


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestGen:
    def test_count_and_determinism(self, tmp_path, capsys):
        code, out, _ = run(capsys, "gen", "--nv", 9, "--ne", 18, "--count", 5, "--seed", 4, "--out", tmp_path / "a")
        assert code == 0 and len(out.splitlines()) == 5
        run(capsys, "--seed", 4, "gen", "--nv", 9, "--ne", 18, "--count", 5, "--out", tmp_path / "b")
        a = sorted(p.name for p in (tmp_path / "a").iterdir())
        assert a == sorted(p.name for p in (tmp_path / "b").iterdir()) and len(a) == 5
        for name in a:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_infeasible(self, tmp_path, capsys):
        code, _, err = run(capsys, "gen", "--nv", 9, "--ne", 40, "--out", tmp_path)
        assert code == 2 and "36" in err

    def test_torus(self, tmp_path, capsys):
        code, out, _ = run(capsys, "gen", "--torus", "3x3", "--out", tmp_path)
        assert code == 0 and out.split()[2] == "18"


class TestHc:
    @pytest.mark.parametrize("name, line", [("torus", "N_hc=48 S0=1024"), ("tree", "N_hc=0 S0=1"), ("k4", "N_hc=3 S0=8")])
    def test_outputs(self, graph_files, capsys, name, line):
        code, out, _ = run(capsys, "hc", graph_files[name])
        assert code == 0 and out.strip() == line

    def test_methods_agree(self, graph_files, capsys):
        outs = {run(capsys, "hc", graph_files["torus"], "--method", m)[1] for m in ("backtrack", "held_karp", "cycle_space")}
        assert outs == {"N_hc=48 S0=1024\n"}

    def test_missing_file(self, tmp_path, capsys):
        assert run(capsys, "hc", tmp_path / "nope.graph")[0] == 2

    def test_malformed(self, tmp_path, capsys):
        bad = tmp_path / "bad.graph"
        bad.write_text("3 2\n0 1\n")
        code, _, err = run(capsys, "hc", bad)
        assert code == 2 and "line 2" in err


class TestSweepAndCritical:
    def test_reduced_sweep_then_critical(self, graph_files, tmp_path, capsys):
        trace = tmp_path / "t.csv"
        code, _, _ = run(capsys, "sweep", graph_files["torus"], "--gs", 0.01, "--n", 10, "--trace-out", trace)
        assert code == 0 and len(trace.read_text().splitlines()) == 102
        code, out, _ = run(capsys, "critical", trace)
        rep = json.loads(out)
        assert code == 0
        assert all(rep[k] > 0 for k in ("g_c_H", "g_c_Z", "lambda_c_H", "lambda_c_Z"))

    def test_gmax_zero(self, graph_files, capsys):
        assert run(capsys, "sweep", graph_files["torus"], "--gmax", 0)[0] == 2

    def test_reverse(self, graph_files, tmp_path, capsys):
        trace = tmp_path / "r.csv"
        run(capsys, "sweep", graph_files["k4"], "--direction", "reverse_lambda", "--gs", 0.25, "--n", 4, "--trace-out", trace)
        assert trace.read_text().splitlines()[0].endswith(",lambda")

    def test_statevector_cap(self, graph_files, tmp_path, capsys):
        code = run(capsys, "--backend", "statevector", "--qubit-cap", 10, "sweep", graph_files["torus"], "--gs", 0.5,
                   "--trace-out", tmp_path / "x.csv")[0]
        assert code == 3

    def test_synthetic_trace(self, tmp_path, capsys):
        g = np.arange(201) * 0.005
        z = np.tanh((g - 0.4) / 0.05)
        e = -0.05 * np.log(np.cosh((g - 0.4) / 0.05))
        path = tmp_path / "s.csv"
        path.write_text("g,energy,z,x,err_bound\n" + "".join(f"{float(a)!r},{float(b)!r},{float(c)!r},0,0\n" for a, b, c in zip(g, e, z)))
        rep = json.loads(run(capsys, "critical", path, "--window", 5)[1])
        assert rep["g_c_Z"] == pytest.approx(0.4) and rep["flags"] == []


class TestSearch:
    def test_torus_found(self, graph_files, capsys):
        code, out, _ = run(capsys, "search", graph_files["torus"], "--shots", 10000)
        assert code == 0
        bits = out.split()[0].split("=")[1]
        assert len(bits) == 18 and bits.count("1") == 9

    def test_tree_not_found(self, graph_files, capsys):
        code, out, _ = run(capsys, "search", graph_files["tree"], "--shots", 1000)
        assert code == 1 and out.startswith("not found")

    def test_seed_determinism(self, graph_files, capsys):
        a = run(capsys, "--seed", 9, "search", graph_files["k4"], "--shots", 50)[1]
        b = run(capsys, "search", graph_files["k4"], "--shots", 50, "--seed", 9)[1]
        assert a == b


class TestBatch:
    def test_batch_and_rerun(self, tmp_path, capsys):
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps(SMALL_SPEC))
        out = tmp_path / "out"
        code, stdout, _ = run(capsys, "--output-dir", out, "batch", spec)
        assert code == 0 and "records=3" in stdout
        journal = (out / "journal.jsonl").read_bytes()
        assert len(journal.splitlines()) == 3
        assert len(list((out / "plots").glob("*.svg"))) == 6
        run(capsys, "--output-dir", out, "batch", spec)
        assert (out / "journal.jsonl").read_bytes() == journal

    def test_full_scale_warns(self, tmp_path, capsys, monkeypatch):
        import z2hc.experiments as ex

        seen = {}

        def fake(spec, out_dir, workers=None):
            seen["spec"] = spec
            return [], {"n_records": 0}, []

        monkeypatch.setattr(ex, "run_batch", fake)
        code, _, err = run(capsys, "--output-dir", tmp_path, "batch", "--paper-scale")
        assert code == 0 and "WARNING" in err
        assert seen["spec"].samples_per_n_edges == 1000 and seen["spec"].schedule.substeps == 100

    def test_bad_trace(self, tmp_path, capsys):
        path = tmp_path / "t.csv"
        path.write_text("g,energy,z,x,err_bound\n0,a,0,0,0\n")
        assert run(capsys, "critical", path)[0] == 2

    def test_bad_spec(self, tmp_path, capsys):
        spec = tmp_path / "bad.json"
        spec.write_text("{nope")
        assert run(capsys, "batch", spec)[0] == 2


def test_version(capsys):
    assert main(["--version"]) == 0
    assert capsys.readouterr().out.strip() == f"z2hc {__version__}"


def test_usage_error(capsys):
    assert main(["frobnicate"]) == 2
    assert main(["gen", "--count", "0"]) == 2
