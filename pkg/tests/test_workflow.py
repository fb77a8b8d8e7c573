import numpy as np
import pytest

from qcp.bench import gen_chain_star, gen_cycle_chain, generate, random_query_pair
from qcp.cq import Constant, Mapping, Query, Schema, Variable, decide_containment_oracle, is_homomorphism
from qcp.reduce import build_generic
from qcp.solve import AnnealConfig, QaoaConfig, SearchSpaceTooLarge
from qcp.verdict import Contained, EarlyReject, FalsePositiveError, NotContained, RejectReason, Undetermined
from qcp.workflow import (
    RunConfig,
    SolverIncompatible,
    bench_rows,
    certify,
    classify,
    decide,
    derive_seed,
    env_seed,
    load_corpus,
    route,
    run_solver,
)

V, C = Variable, Constant
QUICK = RunConfig(anneal=AnnealConfig(num_reads=60, num_sweeps=300), qaoa=QaoaConfig(iterations=10, shots=200))


def cubic_pair():
    # a ternary relation keeps p_ac cubic after simplification
    schema = Schema({"T": 3})
    q1 = Query(schema, {"T": [(V("a"), V("b"), V("c")), (V("b"), V("c"), V("a"))]})
    q2 = Query(schema, {"T": [(V("x"), V("y"), V("z"))]})
    return q1, q2


def test_movie_decisions(movie_pair):
    q1, q2 = movie_pair
    out = decide(q1, q2)
    assert isinstance(out.verdict, Contained) and out.verdict.source == "trivial"
    assert out.verdict.exit_code == 0
    assert out.verdict.witness == Mapping({V("x2"): V("x1"), V("y2"): V("y1"), V("z2"): V("z1"), V("w2"): C("actor")})
    back = decide(q2, q1)
    assert isinstance(back.verdict, NotContained) and back.verdict.exit_code == 1
    assert back.verdict.early_reject.reason is RejectReason.EMPTY_RELATION


@pytest.mark.parametrize("solver", ["sa", "qaoa", "brute", "qa-emulate"])
def test_every_solver_certifies_small_chain(solver):
    fam = gen_cycle_chain(1)
    out = decide(*fam.pair, RunConfig(solver=solver, seed=3))
    assert isinstance(out.verdict, Contained)
    assert is_homomorphism(out.verdict.witness, fam.q2, fam.q1)
    assert out.to_json()["verdict"] == "contained"


def test_brute_witness_is_a_ground_truth_pattern():
    fam = gen_cycle_chain(2)
    out = decide(*fam.pair, RunConfig(solver="brute"))
    assert out.verdict.source == "brute-force"
    x = certify(out.samples, out.instance, *fam.pair)
    assert x == out.verdict.witness
    bits = {"".join(map(str, s.assignment)) for s in out.samples.at_energy(fam.d)}
    assert bits == set(fam.ground_truth)


def test_brute_says_not_contained_exhaustively():
    fam = gen_cycle_chain(2)
    out = decide(fam.q2, fam.q1, RunConfig(solver="brute"))
    assert isinstance(out.verdict, (NotContained,))
    assert out.verdict.reason in ("exhaustive", "early-reject", "trivial")


def test_heuristic_non_discovery_is_undetermined():
    fam = gen_cycle_chain(2)
    out = decide(fam.q2, fam.q1, QUICK)
    assert isinstance(out.verdict, (Undetermined, NotContained))
    if isinstance(out.verdict, Undetermined):
        assert out.verdict.exit_code == 2 and out.verdict.best_energy > out.verdict.d


def test_cubic_instances_fall_back_to_qaoa():
    q1, q2 = cubic_pair()
    out = decide(q1, q2, QUICK)
    assert out.solver == "qaoa" and out.fell_back
    assert out.instance.p.degree == 3
    assert isinstance(out.verdict, (Contained, Undetermined))
    with pytest.raises(SolverIncompatible):
        decide(q1, q2, RunConfig(fallback=False))
    inst = build_generic(q1, q2)
    assert route(inst, RunConfig(solver="brute")) == ("brute", False)


def test_constraint_defaults():
    cfg = RunConfig()
    assert cfg.constrained_for("qaoa") and not cfg.constrained_for("sa")
    assert not RunConfig(constrained=True).constrained_for("qa-emulate")
    assert RunConfig(constrained=True).constrained_for("sa")
    with pytest.raises(ValueError):
        RunConfig(solver="dwave")
    with pytest.raises(ValueError):
        RunConfig(variant="fancy")


def test_constrained_sa_decides():
    fam = gen_chain_star(3)
    out = decide(*fam.pair, RunConfig(constrained=True, anneal=AnnealConfig(num_reads=50)))
    assert out.instance.constrained
    assert isinstance(out.verdict, Contained)


def test_contained_refuses_bad_witness(movie_pair):
    q1, q2 = movie_pair
    bad = Mapping({V("x2"): V("x1"), V("y2"): V("y1"), V("z2"): V("z1"), V("w2"): V("x1")})
    with pytest.raises(FalsePositiveError):
        Contained(bad, "solver", q1, q2)


def test_decide_is_deterministic():
    fam = gen_cycle_chain(3)
    a = decide(*fam.pair, QUICK.with_seed(5))
    b = decide(*fam.pair, QUICK.with_seed(5))
    assert a.samples.to_csv() == b.samples.to_csv()
    assert a.to_json() == b.to_json()


def test_run_solver_on_constant_instance(movie_pair):
    from qcp.reduce import build_simplified

    inst = build_simplified(*movie_pair)
    for solver in ("sa", "brute", "qaoa", "qa-emulate"):
        samples = run_solver(solver, inst, QUICK)
        assert samples.lowest.energy == -2


def test_seeds():
    assert derive_seed(0, 1) != derive_seed(0, 2)
    assert derive_seed(7, 3) == derive_seed(7, 3)


def test_env_seed(monkeypatch):
    monkeypatch.delenv("QCP_SEED", raising=False)
    assert env_seed() == 0
    monkeypatch.setenv("QCP_SEED", "42")
    assert env_seed() == 42


def _family_corpus():
    entries = []
    for family in ("cycle-chain", "chain-star"):
        for i in range(1, 5):
            fam = generate(family, i)
            entries.append((f"{family}-{i}", fam.q1, fam.q2, True))
    for family in ("cycle-chain", "chain-star"):
        for i in range(1, 6):
            fam = generate(family, i)
            entries.append((f"{family}-{i}-rev", fam.q2, fam.q1, False))
    return entries


def test_classify_family_corpus_with_brute():
    table = classify(_family_corpus(), RunConfig(solver="brute"))
    assert table.as_dict() == {"TP": 8, "FP": 0, "FN": 0, "TN": 10, "bottom": 0}


def test_classify_family_corpus_with_sa():
    table = classify(_family_corpus(), QUICK)
    assert table.fp == 0
    assert table.tp + table.fn == 8 and table.tn == 10


def test_classify_empty_and_caps():
    assert classify([]).as_dict() == {"TP": 0, "FP": 0, "FN": 0, "TN": 0, "bottom": 0}
    fam = gen_cycle_chain(4)
    table = classify([("big", *fam.pair, True)], RunConfig(solver="brute", brute_cap=16))
    assert table.bottom == 1 and table.rows[0][2] == "bottom"


def test_load_corpus(tmp_path):
    from qcp.cq import dump_query_pair

    fam = gen_cycle_chain(1)
    (tmp_path / "a.json").write_text(dump_query_pair(*fam.pair, label="positive"))
    (tmp_path / "b.json").write_text(dump_query_pair(fam.q2, fam.q1, label=False))
    entries = load_corpus(tmp_path)
    assert [(n, lab) for n, _, _, lab in entries] == [("a.json", True), ("b.json", False)]
    (tmp_path / "c.json").write_text(dump_query_pair(*fam.pair))
    with pytest.raises(ValueError, match="no label"):
        load_corpus(tmp_path)


def test_bench_rows():
    rows = bench_rows("cycle-chain", [1, 2], RunConfig(solver="brute"))
    assert [(r["i"], r["num_vars"], r["argmin_count"]) for r in rows] == [(1, 4, 2), (2, 6, 2)]
    rows = bench_rows("chain-star", [2], QUICK)
    assert 0 < rows[0]["solution_probability"] <= 1
    rows = bench_rows("cycle-chain", [6], RunConfig(solver="brute", brute_cap=64))
    assert rows[0]["argmin_count"] == "NA"


def test_brute_agrees_with_oracle_on_random_pairs():
    rng = np.random.default_rng(11)
    checked = 0
    for _ in range(150):
        q1, q2 = random_query_pair(rng)
        try:
            out = decide(q1, q2, RunConfig(solver="brute", brute_cap=2**16))
        except SearchSpaceTooLarge:
            continue
        checked += 1
        assert isinstance(out.verdict, Contained) == decide_containment_oracle(q1, q2)
        assert not isinstance(out.verdict, Undetermined)
    assert checked > 100
