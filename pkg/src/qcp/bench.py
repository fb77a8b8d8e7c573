"""Parameterised query families, energy landscapes and their closed forms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .cq import Constant, Query, Schema, Variable
from .poly import BinaryPolynomial
from .reduce import ProblemInstance
from .solve.exact import DEFAULT_CAP, all_energies
from .solve.samples import indices_to_bits

FAMILIES = ("cycle-chain", "chain-star")
EDGE = Schema({"E": 2})


@dataclass(frozen=True)
class FamilyInstance:
    family: str
    i: int
    q1: Query
    q2: Query
    ground_truth: tuple[str, str]
    num_vars: int
    weight: int
    d: int

    @property
    def pair(self) -> tuple[Query, Query]:
        return self.q1, self.q2


def _edges(pairs) -> Query:
    return Query(EDGE, {"E": [(Variable(a), Variable(b)) for a, b in pairs]}, ())


def gen_cycle_chain(i: int) -> FamilyInstance:
    """q1 is the directed 2-cycle, q2 the directed chain with i edges."""
    if i < 1:
        raise ValueError("i must be >= 1")
    q1 = _edges([("z0", "z1"), ("z1", "z0")])
    q2 = _edges([(f"y{k - 1}", f"y{k}") for k in range(1, i + 1)])
    left = "".join("10" if k % 2 == 0 else "01" for k in range(i + 1))
    right = "".join("01" if k % 2 == 0 else "10" for k in range(i + 1))
    return FamilyInstance("cycle-chain", i, q1, q2, (left, right), 2 * (i + 1), 2 * i + 1, -i)


def gen_chain_star(i: int) -> FamilyInstance:
    """q1 is the directed 2-edge chain, q2 the out-star with i leaves."""
    if i < 1:
        raise ValueError("i must be >= 1")
    q1 = _edges([("z0", "z1"), ("z1", "z2")])
    q2 = _edges([("y0", f"y{k}") for k in range(1, i + 1)])
    return FamilyInstance("chain-star", i, q1, q2, ("100" + "010" * i, "010" + "001" * i),
                          3 * (i + 1), 2 * i + 1, -i)


def generate(family: str, i: int) -> FamilyInstance:
    if family == "cycle-chain":
        return gen_cycle_chain(i)
    if family == "chain-star":
        return gen_chain_star(i)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def family_polynomial(family: str, i: int, constrained: bool = False) -> BinaryPolynomial:
    """The family polynomial written out term by term (row k, column c -> id k*cols + c)."""
    terms: dict[tuple[int, ...], int] = {}
    if family == "cycle-chain":
        cols = 2
        for k in range(1, i + 1):
            terms[(cols * (k - 1) + 0, cols * k + 1)] = -1
            terms[(cols * (k - 1) + 1, cols * k + 0)] = -1
        pairs = [(0, 1)]
    elif family == "chain-star":
        cols = 3
        for k in range(1, i + 1):
            terms[(0, cols * k + 1)] = -1
            terms[(1, cols * k + 2)] = -1
        pairs = [(0, 1), (0, 2), (1, 2)]
    else:
        raise ValueError(f"unknown family {family!r}")
    if not constrained:
        for k in range(i + 1):
            for a, b in pairs:
                terms[(cols * k + a, cols * k + b)] = 2 * i + 1
    return BinaryPolynomial(terms, cols * (i + 1))


# --------------------------------------------------------------------------- landscapes


@dataclass
class LandscapeReport:
    num_vars: int
    d: int
    pos: int
    zero: int
    neg_histogram: dict[int, int]
    strict_local_minima: list[tuple[str, int]]
    zero_adjacency: int = 0
    metadata: dict = field(default_factory=dict)

    @property
    def neg(self) -> int:
        return sum(self.neg_histogram.values())

    @property
    def total(self) -> int:
        return self.pos + self.zero + self.neg

    @property
    def p_pos(self) -> Fraction:
        return Fraction(self.pos, self.total)

    @property
    def p_neg_given_notpos(self) -> Fraction:
        return Fraction(self.neg, self.total - self.pos)

    @property
    def p_zero_given_notpos(self) -> Fraction:
        return Fraction(self.zero, self.total - self.pos)

    def fractions(self) -> dict[str, Fraction]:
        return {"p_pos": self.p_pos, "p_neg_given_notpos": self.p_neg_given_notpos,
                "p_zero_given_notpos": self.p_zero_given_notpos}

    def to_json(self) -> dict:
        return {
            "num_vars": self.num_vars,
            "d": self.d,
            "counts": {"pos": self.pos, "zero": self.zero,
                       "neg": {str(k): v for k, v in sorted(self.neg_histogram.items())}},
            "fractions": {k: {"exact": str(v), "decimal": float(v)} for k, v in self.fractions().items()},
            "strict_local_minima": [{"bits": b, "energy": e} for b, e in self.strict_local_minima],
            "zero_adjacency": self.zero_adjacency,
            **({"metadata": self.metadata} if self.metadata else {}),
        }


def enumerate_landscape(inst: ProblemInstance, cap: int = DEFAULT_CAP) -> LandscapeReport:
    """Classify every bitvector of the unconstrained space and find strict local minima."""
    if inst.constrained:
        raise ValueError("landscapes are enumerated over the unconstrained space")
    n = inst.num_vars
    energies = all_energies(inst.p, cap)
    pos = int(np.count_nonzero(energies > 0))
    zero = int(np.count_nonzero(energies == 0))
    values, counts = np.unique(energies[energies < 0], return_counts=True)
    minima = np.flatnonzero(_kernels.strict_local_minima(energies, n))
    bits = indices_to_bits(minima, n)
    strict = [("".join(map(str, b)), int(energies[m])) for b, m in zip(bits.tolist(), minima.tolist())]
    is_zero = energies == 0
    adjacency = 0
    for b in range(n):
        view = is_zero.reshape(-1, 2, 1 << b)
        adjacency += int(np.count_nonzero(view[:, 0, :] & view[:, 1, :]))
    return LandscapeReport(n, inst.d, pos, zero, {int(v): int(c) for v, c in zip(values, counts)},
                           strict, adjacency)


def pell_lucas(m: int) -> int:
    """(1+sqrt2)^m + (1-sqrt2)^m."""
    a, b = 2, 2
    for _ in range(m):
        a, b = b, 2 * b + a
    return a


def closed_form_fractions(family: str, i: int) -> dict[str, Fraction]:
    if i < 1:
        raise ValueError("i must be >= 1")
    if family == "cycle-chain":
        p_pos = 1 - Fraction(3, 4) ** (i + 1)
        denom = 2 * 3 ** (i + 1)
        p_neg = Fraction(denom - pell_lucas(i + 2), denom)
        return {"p_pos": p_pos, "p_neg_given_notpos": p_neg, "p_zero_given_notpos": 1 - p_neg}
    if family == "chain-star":
        q = Fraction(3, 4) ** i
        return {"p_pos": 1 - Fraction(1, 2) ** (i + 1),
                "p_neg_given_notpos": (1 - q) / 2,
                "p_zero_given_notpos": (1 + q) / 2}
    raise ValueError(f"unknown family {family!r}")


def chain_neg_fraction_float(i: int) -> float:
    """Irrational form of the chain-family neg fraction, evaluated in floating point."""
    r = math.sqrt(2)
    return (2 * 3 ** (i + 1) - (1 + r) ** (i + 2) - (1 - r) ** (i + 2)) / (2 * 3 ** (i + 1))


def escape_probability(i: int, time_fraction: float = 0.25, beta_start: float = 0.5,
                       beta_end: float = 10.0, steps: int = 1000) -> float:
    """Chance of rejecting an uphill move of height i at the given point of a geometric schedule."""
    if not 0 <= time_fraction <= 1:
        raise ValueError("time_fraction must lie in [0, 1]")
    return 1.0 - math.exp(-schedule_beta(time_fraction, beta_start, beta_end, steps) * i)


def schedule_beta(time_fraction: float, beta_start: float = 0.5, beta_end: float = 10.0,
                  steps: int = 1000) -> float:
    alpha = (beta_end / beta_start) ** (1.0 / steps)
    return beta_start * alpha ** round(time_fraction * steps)


# --------------------------------------------------------------------------- random pairs


def random_query_pair(rng: np.random.Generator, max_relations: int = 3, max_arity: int = 3,
                      max_tuples: int = 4, max_vars: int = 6, num_constants: int = 2,
                      max_answer: int = 2, related: float = 0.5) -> tuple[Query, Query]:
    """Small random pair over a shared schema.

    With probability ``related`` q1 is built as an image of q2 under a random
    map (plus noise), which makes containment likely.
    """
    nrel = int(rng.integers(1, max_relations + 1))
    schema = Schema({f"R{k}": int(rng.integers(0, max_arity + 1)) for k in range(nrel)})
    consts = [Constant(f"c{k}") for k in range(num_constants)]

    def random_query(nvars: int, ntuples: int) -> Query:
        pool = [Variable(f"v{k}") for k in range(nvars)]
        terms = pool + consts
        tableau: dict[str, set] = {r: set() for r in schema.names}
        for _ in range(ntuples):
            rel = schema.names[int(rng.integers(len(schema.names)))]
            ar = schema.relations[rel]
            tableau[rel].add(tuple(terms[int(rng.integers(len(terms)))] if rng.random() < 0.85 else
                                   consts[int(rng.integers(len(consts)))] for _ in range(ar)))
        used = sorted({t for ts in tableau.values() for u in ts for t in u if isinstance(t, Variable)},
                      key=lambda v: v.name)
        arity = int(rng.integers(0, max_answer + 1))
        answer = []
        for _ in range(arity):
            if used and rng.random() < 0.85:
                answer.append(used[int(rng.integers(len(used)))])
            else:
                answer.append(consts[int(rng.integers(len(consts)))])
        return Query(schema, tableau, tuple(answer))

    q2 = random_query(int(rng.integers(1, max_vars + 1)), int(rng.integers(0, max_tuples + 1)))
    if rng.random() < related:
        targets = [Variable(f"w{k}") for k in range(int(rng.integers(1, max_vars + 1)))] + consts
        image = {v: targets[int(rng.integers(len(targets)))] for v in q2.variables}

        def img(t):
            return image.get(t, t)

        tableau = {r: {tuple(img(t) for t in u) for u in q2.tableau[r]} for r in schema.names}
        extra = random_query(int(rng.integers(1, max_vars + 1)), int(rng.integers(0, 2)))
        for r in schema.names:
            tableau[r] |= set(extra.tableau[r])
        q1 = Query(schema, tableau, tuple(img(t) for t in q2.answer))
    else:
        q1 = random_query(int(rng.integers(1, max_vars + 1)), int(rng.integers(0, max_tuples + 1)))
    return q1, q2
