import json
import subprocess
import sys

import pytest

from qcp.bench import generate
from qcp.cli import main
from qcp.cq import parse_query_pair

FAST = ["--reads", "40", "--sweeps", "200", "--iterations", "8", "--shots", "100"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_decide_movie(capsys, movie_path):
    code, out, _ = run(capsys, "decide", movie_path)
    data = json.loads(out)
    assert code == 0
    assert data["verdict"] == "contained" and data["source"] == "trivial"
    assert data["witness"] == {"?w2": "'actor'", "?x2": "?x1", "?y2": "?y1", "?z2": "?z1"}


def test_decide_reversed_movie(capsys, movie_path, tmp_path):
    data = json.loads(movie_path.read_text())
    data["q1"], data["q2"] = data["q2"], data["q1"]
    path = tmp_path / "rev.json"
    path.write_text(json.dumps(data))
    code, out, _ = run(capsys, "decide", path)
    assert code == 1
    assert json.loads(out)["early_reject"]["reason"] == "empty-relation"


def test_decide_undetermined_exit_code(capsys, tmp_path):
    path = tmp_path / "pair.json"
    run(capsys, "generate", "cycle-chain", 3, "--out", path)
    data = json.loads(path.read_text())
    data["q1"], data["q2"] = data["q2"], data["q1"]
    path.write_text(json.dumps(data))
    code, out, _ = run(capsys, "decide", path, *FAST)
    assert code in (1, 2)
    code, out, _ = run(capsys, "--solver", "brute", "decide", path)
    assert code == 1 and json.loads(out)["reason"] in ("exhaustive", "trivial")


def test_global_flags_after_subcommand(capsys, tmp_path):
    path = tmp_path / "pair.json"
    run(capsys, "generate", "chain-star", 2, "--out", path)
    code, out, _ = run(capsys, "decide", path, "--solver", "brute", "--variant", "generic", "--seed", 4)
    data = json.loads(out)
    assert code == 0 and data["solver_used"] == "brute"
    assert data["instance"]["variant"] == "generic-unconstrained"


def test_reduce_movie(capsys, movie_path):
    code, out, _ = run(capsys, "reduce", movie_path)
    data = json.loads(out)
    assert code == 0
    assert data["num_vars"] == 0 and data["monomials"] == [{"coef": -2, "vars": []}] and data["d"] == -2
    code, out, _ = run(capsys, "--variant", "generic", "reduce", movie_path)
    assert json.loads(out)["num_vars"] == 18


def test_reduce_constrained(capsys, tmp_path):
    path = tmp_path / "pair.json"
    run(capsys, "generate", "cycle-chain", 2, "--out", path)
    code, out, _ = run(capsys, "--constrained", "reduce", path)
    data = json.loads(out)
    assert data["constraint"] == "one-hot-per-row" and len(data["groups"]) == 3


def test_solve_writes_csv_and_sidecar(capsys, tmp_path):
    pair = tmp_path / "pair.json"
    run(capsys, "generate", "cycle-chain", 2, "--out", pair)
    out_csv = tmp_path / "samples.csv"
    code, _, _ = run(capsys, "solve", pair, "--out", out_csv, "--seed", 9, *FAST)
    assert code == 0
    lines = out_csv.read_text().splitlines()
    assert lines[0] == "assignment_bits,energy,count"
    assert sum(int(line.split(",")[2]) for line in lines[1:]) == 40
    meta = json.loads((tmp_path / "samples.csv.json").read_text())
    assert meta["seed"] == 9 and meta["solver"] == "sa" and "wall_time" in meta
    again = tmp_path / "again.csv"
    run(capsys, "solve", pair, "--out", again, "--seed", 9, *FAST)
    assert again.read_bytes() == out_csv.read_bytes()


def test_seed_from_environment(capsys, tmp_path, monkeypatch):
    pair = tmp_path / "pair.json"
    run(capsys, "generate", "cycle-chain", 2, "--out", pair)
    monkeypatch.setenv("QCP_SEED", "9")
    run(capsys, "solve", pair, "--out", tmp_path / "env.csv", *FAST)
    monkeypatch.delenv("QCP_SEED")
    run(capsys, "solve", pair, "--out", tmp_path / "flag.csv", "--seed", 9, *FAST)
    assert (tmp_path / "env.csv").read_bytes() == (tmp_path / "flag.csv").read_bytes()


def test_generate_round_trip(capsys):
    code, out, _ = run(capsys, "generate", "chain-star", 3)
    assert code == 0
    q1, q2 = parse_query_pair(out)
    fam = generate("chain-star", 3)
    assert (q1, q2) == fam.pair
    assert json.loads(out)["ground_truth"] == list(fam.ground_truth)


def test_generate_corpus_and_classify(capsys, tmp_path):
    corpus = tmp_path / "corpus"
    run(capsys, "generate", "cycle-chain", 1, "--to", 3, "--corpus", corpus, "--reversed")
    run(capsys, "generate", "chain-star", 1, "--to", 3, "--corpus", corpus, "--reversed")
    assert len(list(corpus.glob("*.json"))) == 12
    code, out, _ = run(capsys, "--solver", "brute", "classify", corpus)
    data = json.loads(out)
    assert code == 0
    assert (data["TP"], data["FP"], data["FN"], data["TN"]) == (6, 0, 0, 6)
    code, out, _ = run(capsys, "classify", corpus, *FAST)
    assert code == 0 and json.loads(out)["FP"] == 0


def test_mislabelled_corpus_is_an_error(capsys, tmp_path, movie_path):
    data = json.loads(movie_path.read_text())
    data["label"] = "negative"
    (tmp_path / "m.json").write_text(json.dumps(data))
    code, out, err = run(capsys, "classify", tmp_path)
    assert code == 3 and json.loads(out)["FP"] == 1 and "labelled negative" in err


def test_unlabelled_corpus(capsys, tmp_path, movie_path):
    (tmp_path / "m.json").write_text(movie_path.read_text())
    code, _, err = run(capsys, "classify", tmp_path)
    assert code == 3 and "no label" in err


def test_landscape(capsys, movie_path):
    code, out, _ = run(capsys, "landscape", "chain-star", 1)
    data = json.loads(out)
    assert code == 0
    assert data["counts"] == {"pos": 48, "zero": 14, "neg": {"-1": 2}}
    assert data["metadata"]["closed_form"]["p_pos"] == "3/4"
    code, out, _ = run(capsys, "landscape", "cycle-chain", 1)
    assert "2*3^(i+1)" in json.loads(out)["metadata"]["note"]
    code, out, _ = run(capsys, "--variant", "generic", "landscape", movie_path)
    assert json.loads(out)["num_vars"] == 18


def test_bench(capsys):
    code, out, _ = run(capsys, "--solver", "brute", "bench", "cycle-chain", 1, 3)
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "i,num_vars,argmin_count,wall_time"
    assert [line.split(",")[:3] for line in lines[1:]] == [["1", "4", "2"], ["2", "6", "2"], ["3", "8", "2"]]
    code, out, _ = run(capsys, "bench", "chain-star", 2, 3, *FAST)
    assert out.splitlines()[0] == "i,num_vars,solution_probability,wall_time"


def test_verify(capsys, movie_path, tmp_path):
    code, out, _ = run(capsys, "decide", movie_path)
    decided = tmp_path / "decided.json"
    decided.write_text(out)
    assert run(capsys, "verify", movie_path, decided)[0] == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"?w2": "?x1", "?x2": "?x1", "?y2": "?y1", "?z2": "?z1"}))
    code, out, _ = run(capsys, "verify", movie_path, bad)
    assert code == 1 and out.strip() == "invalid"
    partial = tmp_path / "partial.json"
    partial.write_text(json.dumps({"?w2": "'actor'"}))
    assert run(capsys, "verify", movie_path, partial)[0] == 1


def test_no_fallback_is_an_error(capsys, tmp_path):
    pair = tmp_path / "cubic.json"
    pair.write_text(json.dumps({
        "schema": {"T": 3},
        "q1": {"tableau": {"T": [["?a", "?b", "?c"], ["?b", "?c", "?a"]]}, "answer": []},
        "q2": {"tableau": {"T": [["?x", "?y", "?z"]]}, "answer": []},
    }))
    code, _, err = run(capsys, "--no-fallback", "decide", pair)
    assert code == 3 and "fallback" in err
    code, out, _ = run(capsys, "decide", pair, *FAST)
    assert json.loads(out)["fell_back"] is True


def test_bad_input_exits_3(capsys, tmp_path):
    missing = tmp_path / "missing.json"
    assert run(capsys, "decide", missing)[0] == 3
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    assert run(capsys, "decide", broken)[0] == 3


def test_brute_cap_exits_3(capsys, tmp_path):
    pair = tmp_path / "pair.json"
    run(capsys, "generate", "cycle-chain", 12, "--out", pair)
    code, _, err = run(capsys, "--solver", "brute", "--variant", "generic", "decide", pair)
    assert code == 3 and "cap" in err


def test_console_script(movie_path):
    out = subprocess.run([sys.executable, "-m", "qcp.cli", "decide", str(movie_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0 and '"contained"' in out.stdout
