import json
import subprocess
import sys

import pytest

from hyperscene import cli
from hyperscene.enrich import enriched_to_dict
from hyperscene.synthetic import planted_hypergraph
from hyperscene.triview import NumericalError, load_params


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def built(tmp_path, kitchen_path):
    out = tmp_path / "k.graph.json"
    assert run("build", kitchen_path, "-o", out) == 0
    return out


def test_build_matches_golden(built, fixtures):
    assert built.read_bytes() == (fixtures / "golden" / "kitchen_small.graph.json").read_bytes()


def test_build_missing_file(tmp_path):
    assert run("build", tmp_path / "absent.json") == 3


def test_build_invalid_scene(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"scene_id": "x", "images": [')
    assert run("build", bad, "-o", tmp_path / "o.json") == 2


def test_build_with_replay_transcript(tmp_path, kitchen_path, fixtures):
    out = tmp_path / "r.json"
    code = run("build", kitchen_path, "-o", out, "--annotator", "replay",
               "--transcript", fixtures / "kitchen_small.transcript.jsonl")
    assert code == 0
    doc = json.loads(out.read_text())
    assert [e["label"] for e in doc["hyperedges"]] == ["Cooking Area", "Dining Area"]
    assert doc["hyperedges"][0]["provenance"] == "Cache"


def test_default_output_dir_from_config(tmp_path, kitchen_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"paths": {"output_dir": str(tmp_path / "out")}, "clustering": {"min_pts": 2}}))
    assert run("--config", cfg, "build", kitchen_path) == 0
    assert (tmp_path / "out" / "kitchen_small.graph.json").exists()


def test_bad_config_section(tmp_path, kitchen_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"bogus": {}}))
    assert run("--config", cfg, "build", kitchen_path) == 2


def test_train_is_reproducible(tmp_path, built):
    traces = []
    for k in range(2):
        trace = tmp_path / f"t{k}.csv"
        params = tmp_path / f"p{k}.bin"
        assert run("train", built, "--steps", 20, "--trace", trace, "--params", params) == 0
        traces.append(trace.read_bytes())
        assert params.read_bytes()[:4] == b"HSTV"
    assert traces[0] == traces[1]
    lines = traces[0].decode().splitlines()
    assert lines[0] == "step,L_n,L_g,L_m,L" and len(lines) == 21


def test_train_zero_steps(tmp_path, built):
    trace, params = tmp_path / "t.csv", tmp_path / "p.bin"
    assert run("train", built, "--steps", 0, "--trace", trace, "--params", params) == 0
    assert trace.read_text() == "step,L_n,L_g,L_m,L\n"
    header, _ = load_params(params)
    assert (header.d, header.d_p) == (32, 32)


def test_train_planted_graph_reduces_loss(tmp_path):
    graph = tmp_path / "planted.json"
    graph.write_text(json.dumps(enriched_to_dict(planted_hypergraph())))
    trace = tmp_path / "t.csv"
    assert run("train", graph, "--steps", 200, "--trace", trace, "--params", tmp_path / "p.bin") == 0
    rows = [line.split(",") for line in trace.read_text().splitlines()[1:]]
    assert float(rows[-1][4]) < float(rows[0][4])


def test_train_numerical_failure_exit_code(tmp_path, built, monkeypatch):
    def boom(*a, **k):
        raise NumericalError(3)

    monkeypatch.setattr(cli, "train", boom)
    assert run("train", built, "--trace", tmp_path / "t.csv", "--params", tmp_path / "p.bin") == 4


def test_export_matches_golden(tmp_path, built, fixtures):
    xml, prompt = tmp_path / "g.xml", tmp_path / "p.txt"
    assert run("export", built, "--xml", xml, "--prompt", prompt) == 0
    assert xml.read_bytes() == (fixtures / "golden" / "kitchen_small.graph.xml").read_bytes()
    assert prompt.read_bytes() == (fixtures / "golden" / "kitchen_small.prompt.txt").read_bytes()


def test_export_unknown_template(tmp_path, built):
    assert run("export", built, "--template", "nope", "--xml", tmp_path / "g.xml",
               "--prompt", tmp_path / "p.txt") == 2


def test_export_empty_graph(tmp_path):
    scene = tmp_path / "empty.json"
    scene.write_text(json.dumps({"scene_id": "e", "images": [{"id": "i", "width": 10, "height": 10}],
                                 "objects": []}))
    graph, xml = tmp_path / "e.graph.json", tmp_path / "e.xml"
    assert run("build", scene, "-o", graph) == 0
    assert run("export", graph, "--xml", xml, "--prompt", tmp_path / "e.txt") == 0
    assert xml.read_text() == '<scene id="e"/>\n'


def test_eval_corpus(tmp_path, fixtures, capsys):
    c = fixtures / "corpus"
    assert run("eval", c / "plans", c / "envs", c / "golds") == 0
    out = capsys.readouterr().out
    assert out.splitlines()[-1] == "__mean__,0.500000,0.750000,0.333333"


def test_eval_empty_and_mismatched(tmp_path, fixtures, capsys):
    for d in ("p", "e", "g"):
        (tmp_path / d).mkdir()
    report = tmp_path / "r.csv"
    assert run("eval", tmp_path / "p", tmp_path / "e", tmp_path / "g", "-o", report) == 0
    assert report.read_text() == "sample,exec,lcs,correct\n"
    c = fixtures / "corpus"
    assert run("eval", c / "plans", c / "envs", tmp_path / "g") == 2


def test_grad_check_command(capsys):
    assert run("grad-check", "--trials", 2, "--seed", 1) == 0
    assert "max" in capsys.readouterr().out.lower()


def test_help_via_entry_module():
    proc = subprocess.run([sys.executable, "-m", "hyperscene.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for name in ("build", "train", "export", "eval", "grad-check"):
        assert name in proc.stdout
