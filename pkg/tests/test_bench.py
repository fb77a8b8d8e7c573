import math
from fractions import Fraction

import numpy as np
import pytest

from qcp.bench import (
    FAMILIES,
    chain_neg_fraction_float,
    closed_form_fractions,
    enumerate_landscape,
    escape_probability,
    family_polynomial,
    gen_chain_star,
    gen_cycle_chain,
    generate,
    pell_lucas,
    random_query_pair,
    schedule_beta,
)
from qcp.cq import decide_containment_oracle, is_homomorphism
from qcp.reduce import apply_constraints, build_generic, build_simplified, extract_witness
from qcp.solve import brute_force_min


def test_family_shapes():
    fam = gen_cycle_chain(1)
    assert fam.ground_truth == ("1001", "0110")
    assert (fam.num_vars, fam.weight, fam.d) == (4, 3, -1)
    star = gen_chain_star(2)
    assert star.ground_truth == ("100010010", "010001001")
    assert (star.num_vars, star.weight, star.d) == (9, 5, -2)
    assert star.q1.answer == star.q2.answer == ()
    with pytest.raises(ValueError):
        generate("cycle-chain", 0)
    with pytest.raises(ValueError):
        generate("triangle", 1)


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("i", [1, 2, 5, 13, 20])
def test_generic_instance_is_family_polynomial(family, i):
    fam = generate(family, i)
    inst = build_generic(*fam.pair)
    assert inst.p == family_polynomial(family, i)
    assert apply_constraints(inst).p == family_polynomial(family, i, constrained=True)
    assert (inst.num_vars, inst.weight, inst.d) == (fam.num_vars, fam.weight, fam.d)


@pytest.mark.parametrize("family, limit", [("cycle-chain", 5), ("chain-star", 4)])
def test_brute_force_recovers_ground_truth(family, limit):
    for i in range(1, limit + 1):
        fam = generate(family, i)
        best, argmins = brute_force_min(build_generic(*fam.pair))
        assert best == -i
        assert sorted("".join(map(str, x)) for x in argmins) == sorted(fam.ground_truth)
        for x in argmins:
            h = extract_witness(x, build_generic(*fam.pair).layout)
            assert is_homomorphism(h, fam.q2, fam.q1)


def test_star_landscape_counts():
    report = enumerate_landscape(build_generic(*gen_chain_star(1).pair))
    assert (report.pos, report.zero, report.neg_histogram) == (48, 14, {-1: 2})
    assert report.total == 64
    assert report.fractions() == closed_form_fractions("chain-star", 1)


def test_chain_landscape_i1():
    report = enumerate_landscape(build_generic(*gen_cycle_chain(1).pair))
    assert report.p_pos == Fraction(7, 16)
    assert report.p_neg_given_notpos == Fraction(2, 9)


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("i", [1, 2, 3, 4])
def test_landscape_matches_closed_form(family, i):
    report = enumerate_landscape(build_generic(*generate(family, i).pair))
    assert report.fractions() == closed_form_fractions(family, i)
    assert report.pos + report.zero + report.neg == 2 ** report.num_vars


@pytest.mark.parametrize("i", range(1, 8))
def test_pell_form_matches_rational(i):
    exact = closed_form_fractions("cycle-chain", i)["p_neg_given_notpos"]
    assert abs(chain_neg_fraction_float(i) - float(exact)) < 1e-12


def test_chain_neg_fraction_values():
    assert closed_form_fractions("cycle-chain", 2)["p_neg_given_notpos"] == Fraction(10, 27)
    assert [pell_lucas(m) for m in range(6)] == [2, 2, 6, 14, 34, 82]
    for m in range(6):
        assert pell_lucas(m) == round((1 + math.sqrt(2)) ** m + (1 - math.sqrt(2)) ** m)


@pytest.mark.parametrize("i", range(1, 6))
def test_star_minima_are_the_optima(i):
    fam = gen_chain_star(i)
    report = enumerate_landscape(build_generic(*fam.pair))
    assert sorted(b for b, _ in report.strict_local_minima) == sorted(fam.ground_truth)


def test_chain_has_trap_at_i3():
    fam = gen_cycle_chain(3)
    report = enumerate_landscape(build_generic(*fam.pair))
    minima = dict(report.strict_local_minima)
    assert minima["10010110"] == -2
    assert report.d == -3
    # the trap still decodes to a function, just not to a homomorphism
    x = [int(c) for c in "10010110"]
    h = extract_witness(x, build_generic(*fam.pair).layout)
    assert not is_homomorphism(h, fam.q2, fam.q1)


def test_landscape_json():
    report = enumerate_landscape(build_generic(*gen_chain_star(1).pair))
    data = report.to_json()
    assert data["counts"] == {"pos": 48, "zero": 14, "neg": {"-1": 2}}
    assert data["fractions"]["p_pos"] == {"exact": "3/4", "decimal": 0.75}
    assert report.zero_adjacency > 0


def test_landscape_rejects_constrained():
    with pytest.raises(ValueError):
        enumerate_landscape(apply_constraints(build_generic(*gen_cycle_chain(1).pair)))


def test_escape_probability():
    beta = schedule_beta(0.25)
    assert beta == pytest.approx(0.5 * 20 ** 0.25, abs=1e-12)
    assert escape_probability(1) == pytest.approx(1 - math.exp(-beta), abs=1e-12)
    assert escape_probability(1) == pytest.approx(0.6527, abs=1e-4)
    assert escape_probability(4) == pytest.approx(0.9854, abs=1e-4)
    assert escape_probability(3, time_fraction=0) == pytest.approx(1 - math.exp(-1.5))
    with pytest.raises(ValueError):
        escape_probability(1, time_fraction=1.5)


def test_random_pairs_are_mixed():
    rng = np.random.default_rng(0)
    verdicts = [decide_containment_oracle(*random_query_pair(rng)) for _ in range(200)]
    assert 20 < sum(verdicts) < 180


def test_simplified_star_matches_generic():
    fam = gen_chain_star(3)
    assert build_simplified(*fam.pair).p == build_generic(*fam.pair).p
