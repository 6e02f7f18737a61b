import json

import pytest

from profilegm import io
from profilegm.cli import run


def ok(argv):
    assert run([str(a) for a in argv]) == 0


@pytest.fixture
def sim(tmp_path):
    d = tmp_path / "d"
    ok(["simulate", "--scenario", 1, "--p", 8, "--q", 3, "--n", 30, "--seed", 1, "--out", d])
    return d


def test_simulate_writes_files(sim):
    names = sorted(f.name for f in sim.iterdir())
    assert names == ["level_0.csv", "level_1.csv", "level_2.csv", "truth_graph.json", "truth_params.json"]


def test_fit_extract_evaluate_pipeline(sim, tmp_path, capsys):
    m, g, t = tmp_path / "m.json", tmp_path / "g.json", tmp_path / "t.csv"
    ok(["fit", "--data", sim, "--out", m, "--trace", t, "--standardize", "--max-iter", 40])
    lines = t.read_text().splitlines()
    assert lines[0] == "iteration,Q,max_abs_delta_omega,max_abs_delta_beta"
    assert len(lines) >= 3
    ok(["extract-graph", "--model", m, "--out", g])
    graph = io.load_graph(g)
    assert graph.vertices == tuple(f"y{i}" for i in range(1, 9))
    capsys.readouterr()
    ok(["evaluate", "--truth", sim, "--estimate", m, "--format", "json", "--per-level"])
    res = json.loads(capsys.readouterr().out)
    assert set(res) == {"pooled", "0", "1", "2"}
    assert 0 <= res["pooled"]["auc"] <= 1
    ok(["evaluate", "--truth", sim, "--estimate", g])
    head = capsys.readouterr().out.splitlines()[0].split()
    assert head == ["Accuracy", "Sensitivity", "Specificity", "AUC"]


def test_fit_flags_and_hyper_file(sim, tmp_path):
    h = tmp_path / "h.json"
    h.write_text(json.dumps({"nu0": 0.2, "tau": 0.5}))
    m = tmp_path / "m.json"
    ok(["fit", "--data", sim, "--out", m, "--hyper", h, "--tau", 0.3, "--max-iter", 5])
    hyper = json.loads(m.read_text())["hyper"]
    assert hyper["nu0"] == 0.2 and hyper["tau"] == 0.3


def test_outputs_are_deterministic(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / f"d{k}"
        ok(["simulate", "--scenario", 2, "--p", 6, "--q", 4, "--s", 0.01, "--n", 15, "--seed", 3, "--out", d])
        ok(["fit", "--data", d, "--out", d / "m.json", "--max-iter", 20])
        ok(["robustness", "--data", d, "--reps", 2, "--seed", 5, "--max-iter", 10, "--out", d / "r.txt"])
        outs.append({f.name: f.read_bytes() for f in sorted(d.iterdir())})
    assert outs[0] == outs[1]


def test_graph_commands(tmp_path, g1, gex, capsys):
    gf, ef = tmp_path / "g1.json", tmp_path / "ex.json"
    io.save_graph(g1, gf)
    io.save_graph(gex, ef)
    ok(["export-dot", "--graph", gf])
    dot = capsys.readouterr().out
    assert dot.count("style=dashed") == 3 and dot.count(" -- ") == 4
    ok(["enumerate-independencies", "--graph", gf, "--property", "csmp", "--format", "text"])
    assert "Y_{a,c}(2) _||_ Y_{b}(2) | Y_{d}(2)" in capsys.readouterr().out.splitlines()
    ok(["enumerate-independencies", "--graph", gf, "--property", "pmp", "--format", "json"])
    assert {"blocks": [["b"], ["c"]], "given": ["a", "d"], "profiles": ["1", "2"]} in json.loads(capsys.readouterr().out)
    ok(["chain-class", "--graph", ef])
    cc = json.loads(capsys.readouterr().out)
    assert cc["min"]["arrows"] == ["a", "b"] and cc["max"]["arrows"] == ["a", "b", "c"]
    chain = tmp_path / "c.json"
    chain.write_text(json.dumps({"vertices": ["a", "b", "c"], "edges": [["a", "b"], ["a", "c"]], "arrows": ["c"]}))
    ok(["check-compat", "--graph", ef, "--chain", chain])
    assert json.loads(capsys.readouterr().out)["compatible"] is False
    ok(["verify-thm1", "--p", 3, "--q", 2])
    assert json.loads(capsys.readouterr().out)["equivalent"] is True
    ok(["check-equivalence", "--graph", gf])
    assert json.loads(capsys.readouterr().out)["equivalent"] is True


def test_exit_codes(sim, tmp_path, capsys):
    assert run(["no-such-command"]) == 1
    assert run(["fit", "--bogus-flag"]) == 1
    assert run(["fit", "--data", str(tmp_path / "missing")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(["export-dot", "--graph", str(bad)]) == 1
    assert run(["fit", "--data", str(sim), "--nu0", "1e-310", "--nu1", "1"]) == 2
    assert run(["verify-thm1", "--p", "7", "--q", "3"]) == 1
    err = capsys.readouterr().err
    assert "error:" in err


def test_help_exits_zero(capsys):
    assert run(["--help"]) == 0
    assert "simulate" in capsys.readouterr().out
