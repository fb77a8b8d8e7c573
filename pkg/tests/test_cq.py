import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_db
from qcp.bench import gen_cycle_chain, random_query_pair
from qcp.cq import (
    Constant,
    DatabaseInstance,
    Mapping,
    OracleOverflow,
    Query,
    QueryFormatError,
    Schema,
    Variable,
    canonical_database,
    decide_containment_oracle,
    decode_term,
    dump_query_pair,
    encode_term,
    evaluate_query,
    find_homomorphism,
    is_homomorphism,
    parse_database,
    parse_query_pair,
    term_key,
)

V, C = Variable, Constant
EDGE = Schema({"E": 2})


def edges(pairs, answer=()):
    return Query(EDGE, {"E": [(V(a), V(b)) for a, b in pairs]}, tuple(V(a) for a in answer))


def example_witness():
    return Mapping({V("x2"): V("x1"), V("y2"): V("y1"), V("z2"): V("z1"), V("w2"): C("actor")})


def test_terms_round_trip():
    assert decode_term("?x") == V("x")
    assert decode_term("'L.A.'") == C("L.A.")
    assert decode_term("plain") == C("plain")
    for t in (V("x1"), C("actor"), C("it's")):
        assert decode_term(encode_term(t)) == t
    with pytest.raises(QueryFormatError):
        decode_term("?")


def test_term_order_is_natural_and_variables_first():
    terms = [C("U.S."), V("y10"), C("actor"), V("y2"), C("L.A."), V("X1")]
    ordered = sorted(terms, key=term_key)
    assert ordered == [V("X1"), V("y2"), V("y10"), C("actor"), C("L.A."), C("U.S.")]


def test_movie_file_parses(movie_pair):
    q1, q2 = movie_pair
    assert q1.size == 3 and q2.size == 2
    assert q1.schema == q2.schema
    assert q1.tuples("Person") == [(V("x1"), V("y1"), V("z1"))]
    assert q1.terms == [V("x1"), V("y1"), V("z1"), C("actor"), C("L.A."), C("U.S.")]


def test_empty_boolean_queries():
    text = json.dumps({"schema": {"R": 1}, "q1": {"tableau": {}, "answer": []},
                       "q2": {"tableau": {}, "answer": []}})
    q1, q2 = parse_query_pair(text)
    assert q1.size == q2.size == 0
    assert q1.answer == q2.answer == ()
    assert decide_containment_oracle(q1, q2)


@pytest.mark.parametrize("mutate, message", [
    (lambda d: d["q1"]["tableau"]["City"].__setitem__(0, ["?z1", "'L.A.'"]), "arity"),
    (lambda d: d["q2"].__setitem__("answer", ["?nope"]), "answer variables"),
    (lambda d: d["q1"]["tableau"].__setitem__("Movie", [["?a"]]), "unknown relation"),
    (lambda d: d.pop("schema"), "schema"),
])
def test_malformed_files(movie_path, mutate, message):
    data = json.loads(movie_path.read_text())
    mutate(data)
    with pytest.raises(QueryFormatError, match=message):
        parse_query_pair(json.dumps(data))


def test_syntax_error_reports_position():
    with pytest.raises(QueryFormatError, match="line 1"):
        parse_query_pair('{"schema": ')


def test_dump_round_trip(movie_pair):
    q1, q2 = movie_pair
    again = parse_query_pair(dump_query_pair(q1, q2, label="positive"))
    assert again == (q1, q2)


def test_example_witness_is_homomorphism(movie_pair):
    q1, q2 = movie_pair
    assert is_homomorphism(example_witness(), q2, q1)
    bad = dict(example_witness().items())
    bad[V("w2")] = V("x1")
    assert not is_homomorphism(Mapping(bad), q2, q1)


def test_partial_mapping_is_rejected(movie_pair):
    q1, q2 = movie_pair
    with pytest.raises(ValueError, match="not total"):
        is_homomorphism(Mapping({V("x2"): V("x1")}), q2, q1)


def test_identity_is_homomorphism(movie_pair):
    q1, _ = movie_pair
    identity = Mapping({t: t for t in q1.terms})
    assert is_homomorphism(identity, q1, q1)


def test_oracle_on_movie(movie_pair):
    q1, q2 = movie_pair
    assert find_homomorphism(q2, q1) == example_witness()
    assert find_homomorphism(q1, q2) is None
    assert decide_containment_oracle(q1, q2)
    assert not decide_containment_oracle(q2, q1)


def test_chain_wraps_around_cycle():
    cycle = edges([("z0", "z1"), ("z1", "z0")])
    chain = edges([("y0", "y1"), ("y1", "y2"), ("y2", "y3")])
    h = find_homomorphism(chain, cycle)
    assert h == Mapping({V("y0"): V("z0"), V("y1"): V("z1"), V("y2"): V("z0"), V("y3"): V("z1")})
    assert decide_containment_oracle(cycle, chain)
    assert not decide_containment_oracle(chain, cycle)


def test_oracle_overflow():
    fam = gen_cycle_chain(5)
    with pytest.raises(OracleOverflow):
        find_homomorphism(fam.q2, fam.q1, cap=10)


def test_evaluate_examples(movie_pair):
    q1, _ = movie_pair
    db = DatabaseInstance({
        "Person": [(C("p1"), C("Ann"), C("c1"))],
        "Profession": [(C("p1"), C("actor"))],
        "City": [(C("c1"), C("L.A."), C("U.S."))],
    })
    assert evaluate_query(q1, db) == {(C("Ann"),)}
    cycle = edges([("z0", "z1"), ("z1", "z0")])
    assert evaluate_query(cycle, DatabaseInstance({"E": [(C("a"), C("b")), (C("b"), C("a"))]})) == {()}
    assert evaluate_query(cycle, DatabaseInstance({"E": [(C("a"), C("b"))]})) == set()


def test_parse_database():
    db = parse_database('{"E": [["a", "b"], ["\'b\'", "a"]]}', EDGE)
    assert db.get("E") == {(C("a"), C("b")), (C("b"), C("a"))}
    with pytest.raises(QueryFormatError):
        parse_database('{"E": [["a"]]}', EDGE)


def test_canonical_database_answers_its_own_query(movie_pair):
    for q in movie_pair:
        db, frozen = canonical_database(q)
        assert frozen in evaluate_query(q, db)


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1))
def test_oracle_agrees_with_database_semantics(seed):
    rng = np.random.default_rng(seed)
    q1, q2 = random_query_pair(rng)
    contained = decide_containment_oracle(q1, q2)
    if contained:
        constants = [C("c0"), C("c1"), C("k2"), C("k3"), C("k4")]
        for _ in range(200):
            db = random_db(rng, q1.schema, constants)
            assert evaluate_query(q1, db) <= evaluate_query(q2, db)
    else:
        # the canonical database of q1 separates the two queries
        db, frozen = canonical_database(q1)
        assert frozen in evaluate_query(q1, db)
        assert frozen not in evaluate_query(q2, db)


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1))
def test_found_homomorphisms_verify(seed):
    q1, q2 = random_query_pair(np.random.default_rng(seed))
    h = find_homomorphism(q2, q1)
    if h is not None:
        assert is_homomorphism(h, q2, q1)
    assert decide_containment_oracle(q1, q1)
    assert decide_containment_oracle(q2, q2)
