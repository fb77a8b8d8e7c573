"""Query pair -> (polynomial, target minimum, search space).

Rows of the bit-matrix are the terms of q2, columns the terms of q1. Rows whose
image is already determined (constants, answer variables, and rows pinned by
simplification) are *fixed*; the others are *free* and carry one binary
variable per column, numbered row-major.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Sequence

from .cq import Constant, Mapping, Query, Term, Variable, encode_term, is_homomorphism, term_key
from .poly import BinaryPolynomial, Monomial
from .verdict import Contained, EarlyReject, NotContained, RejectReason

PENALTIES = ("product", "per-relation")


class NotAFunctionError(ValueError):
    """A decoded bit-matrix row has zero or several ones."""


@dataclass(frozen=True)
class Layout:
    columns: tuple[Term, ...]
    rows: tuple[Term, ...]
    free_rows: tuple[Term, ...]
    fixed: dict[Term, int | None] = field(default_factory=dict)  # row -> column index, None = all-zero

    def __post_init__(self):
        object.__setattr__(self, "_col", {c: j for j, c in enumerate(self.columns)})
        object.__setattr__(self, "_free", {r: i for i, r in enumerate(self.free_rows)})

    def __hash__(self):
        return hash((self.columns, self.rows, self.free_rows, tuple(sorted(
            ((term_key(k), v if v is not None else -1) for k, v in self.fixed.items())))))

    @property
    def num_columns(self) -> int:
        return len(self.columns)

    @property
    def num_vars(self) -> int:
        return len(self.free_rows) * len(self.columns)

    def column(self, term: Term) -> int:
        return self._col[term]

    def is_free(self, row: Term) -> bool:
        return row in self._free

    def var_id(self, row: Term, col: int) -> int:
        return self._free[row] * len(self.columns) + col

    def var_label(self, v: int) -> tuple[Term, Term]:
        i, j = divmod(v, len(self.columns))
        return self.free_rows[i], self.columns[j]

    def groups(self) -> list[list[int]]:
        n1 = len(self.columns)
        return [list(range(i * n1, (i + 1) * n1)) for i in range(len(self.free_rows))]

    def pin(self, assignments: dict[Term, int]) -> "Layout":
        """Move free rows to the fixed set."""
        fixed = dict(self.fixed)
        fixed.update(assignments)
        free = tuple(r for r in self.free_rows if r not in assignments)
        return Layout(self.columns, self.rows, free, fixed)

    def to_json(self) -> dict:
        return {
            "rows": [encode_term(r) for r in self.rows],
            "free_rows": [encode_term(r) for r in self.free_rows],
            "fixed_rows": {
                encode_term(r): (None if self.fixed[r] is None else encode_term(self.columns[self.fixed[r]]))
                for r in self.rows if r in self.fixed
            },
            "columns": [encode_term(c) for c in self.columns],
        }


@dataclass(frozen=True)
class ProblemInstance:
    p: BinaryPolynomial
    d: int
    layout: Layout
    variant: str  # generic | simplified
    p_ac: BinaryPolynomial
    p_unique: BinaryPolynomial
    weight: int
    groups: tuple[tuple[int, ...], ...] | None = None  # one-hot groups when constrained

    @property
    def constrained(self) -> bool:
        return self.groups is not None

    @property
    def num_vars(self) -> int:
        return self.p.num_vars

    @property
    def tag(self) -> str:
        return f"{self.variant}-{'constrained' if self.constrained else 'unconstrained'}"

    @property
    def search_space_size(self) -> int:
        if self.constrained:
            size = 1
            for g in self.groups:
                size *= len(g)
            return size
        return 2 ** self.num_vars

    def feasible(self, x: Sequence[int]) -> bool:
        if not self.constrained:
            return True
        return all(sum(x[v] for v in g) == 1 for g in self.groups)

    def to_json(self) -> dict:
        out = self.p.to_json()
        out.update({
            "d": self.d,
            "constraint": "one-hot-per-row" if self.constrained else "unconstrained",
            "variant": self.variant,
            "penalty_weight": self.weight,
            "layout": self.layout.to_json(),
        })
        if self.constrained:
            out["groups"] = [list(g) for g in self.groups]
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


# --------------------------------------------------------------------------- preparation


def prepare(q1: Query, q2: Query) -> Layout:
    """Structural rejection checks (in order) and the extended bit-matrix layout.

    Raises EarlyReject on the first violated check.
    """
    if q1.schema != q2.schema:
        raise ValueError("queries must share a schema")
    v1, v2 = q1.answer, q2.answer
    if len(v1) != len(v2):
        raise EarlyReject(RejectReason.ANSWER_ARITY, f"{len(v2)} != {len(v1)}")
    for a, b in zip(v2, v1):
        if isinstance(a, Constant) and a != b:
            raise EarlyReject(RejectReason.ANSWER_CONSTANT_MISMATCH, f"{a} vs {b}")
    image: dict[Term, Term] = {}
    for a, b in zip(v2, v1):
        if isinstance(a, Variable) and image.setdefault(a, b) != b:
            raise EarlyReject(RejectReason.ANSWER_VARIABLE_CONFLICT, f"{a} -> {image[a]} and {b}")
    for rel in q1.schema.names:
        if q2.tableau[rel] and not q1.tableau[rel]:
            raise EarlyReject(RejectReason.EMPTY_RELATION, rel, relation=rel)

    columns = tuple(q1.terms)
    col = {c: j for j, c in enumerate(columns)}
    rows = tuple(q2.terms)
    fixed: dict[Term, int | None] = {}
    for c in q2.active_domain:
        fixed[c] = col.get(c)
    for a, b in image.items():
        fixed[a] = col[b]
    free = tuple(r for r in rows if r not in fixed)
    return Layout(columns, rows, free, fixed)


# --------------------------------------------------------------------------- polynomials


def build_p_unique(layout: Layout) -> BinaryPolynomial:
    n1 = layout.num_columns
    terms = {}
    for row in layout.free_rows:
        for j in range(n1):
            for k in range(j + 1, n1):
                terms[(layout.var_id(row, j), layout.var_id(row, k))] = 1
    return BinaryPolynomial(terms, layout.num_vars)


def _match_monomial(layout: Layout, u: tuple, w: tuple) -> tuple[int, ...] | None:
    """Variables of prod_k x[u_k, w_k]; None when a fixed entry is 0."""
    out = []
    for a, b in zip(u, w):
        j = layout.column(b)
        if layout.is_free(a):
            out.append(layout.var_id(a, j))
        elif layout.fixed[a] != j:
            return None
    return tuple(out)


def build_p_ac(layout: Layout, q1: Query, q2: Query) -> BinaryPolynomial:
    monomials = []
    for rel in q2.schema.names:
        targets = q1.tuples(rel)
        for u in q2.tuples(rel):
            for w in targets:
                vs = _match_monomial(layout, u, w)
                if vs is not None:
                    monomials.append(Monomial(vs, -1))
    return BinaryPolynomial.normalize(monomials, layout.num_vars)


def penalty_weight(q1: Query, q2: Query, penalty: str = "product") -> int:
    if penalty == "product":
        return q1.size * q2.size + 1
    if penalty == "per-relation":
        return sum(len(q1.tableau[r]) * len(q2.tableau[r]) for r in q1.schema.names) + 1
    raise ValueError(f"unknown penalty {penalty!r}; expected one of {PENALTIES}")


def _assemble(layout: Layout, q1: Query, q2: Query, variant: str, penalty: str) -> ProblemInstance:
    p_ac = build_p_ac(layout, q1, q2)
    p_unique = build_p_unique(layout)
    w = penalty_weight(q1, q2, penalty)
    return ProblemInstance(p_ac + p_unique.scale(w), -q2.size, layout, variant, p_ac, p_unique, w)


def build_generic(q1: Query, q2: Query, penalty: str = "product") -> ProblemInstance:
    return _assemble(prepare(q1, q2), q1, q2, "generic", penalty)


def simplify(layout: Layout, q1: Query, q2: Query, fixpoint: bool = False) -> Layout:
    """Pin rows of q2 tuples that can match exactly one q1 tuple.

    One pass over relations and tuples in canonical order; with ``fixpoint``
    the pass is repeated until nothing changes.
    """
    while True:
        changed = False
        for rel in q2.schema.names:
            targets = q1.tuples(rel)
            for u in q2.tuples(rel):
                live = [w for w in targets if _match_monomial(layout, u, w) is not None]
                if not live:
                    raise EarlyReject(
                        RejectReason.NO_MATCHING_TUPLE,
                        f"{rel}{tuple(str(t) for t in u)} fits no tuple of q1",
                        relation=rel, tuple_=u,
                    )
                if len(live) > 1:
                    continue
                (w,) = live
                pins: dict[Term, int] = {}
                for a, b in zip(u, w):
                    j = layout.column(b)
                    if pins.setdefault(a, j) != j:
                        raise EarlyReject(
                            RejectReason.SIMPLIFICATION_CONFLICT,
                            f"{a} must map to both {layout.columns[pins[a]]} and {b}",
                            relation=rel, tuple_=u,
                        )
                    if not layout.is_free(a) and layout.fixed[a] != j:
                        raise EarlyReject(
                            RejectReason.SIMPLIFICATION_CONFLICT,
                            f"{a} already fixed away from {b}",
                            relation=rel, tuple_=u,
                        )
                new = {a: j for a, j in pins.items() if layout.is_free(a)}
                if new:
                    layout = layout.pin(new)
                    changed = True
        if not fixpoint or not changed:
            return layout


def build_simplified(q1: Query, q2: Query, penalty: str = "product", fixpoint: bool = False) -> ProblemInstance:
    layout = simplify(prepare(q1, q2), q1, q2, fixpoint=fixpoint)
    return _assemble(layout, q1, q2, "simplified", penalty)


def build_instance(q1: Query, q2: Query, variant: str = "simplified", constrained: bool = False,
                   penalty: str = "product", fixpoint: bool = False) -> ProblemInstance:
    if variant == "generic":
        inst = build_generic(q1, q2, penalty)
    elif variant == "simplified":
        inst = build_simplified(q1, q2, penalty, fixpoint)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return apply_constraints(inst) if constrained else inst


def apply_constraints(inst: ProblemInstance) -> ProblemInstance:
    """Drop the row-uniqueness penalty and restrict to one-hot rows."""
    if inst.constrained:
        raise ValueError("instance is already constrained")
    groups = tuple(tuple(g) for g in inst.layout.groups())
    return replace(inst, p=inst.p_ac, weight=0, groups=groups)


# --------------------------------------------------------------------------- decoding


def extract_witness(x: Sequence[int], layout: Layout) -> Mapping:
    if len(x) != layout.num_vars:
        raise ValueError(f"bitvector has length {len(x)}, expected {layout.num_vars}")
    n1 = layout.num_columns
    h = {}
    for row in layout.rows:
        if layout.is_free(row):
            base = layout.var_id(row, 0)
            ones = [j for j in range(n1) if x[base + j]]
            if len(ones) != 1:
                raise NotAFunctionError(f"row {row} has {len(ones)} ones")
            h[row] = layout.columns[ones[0]]
        else:
            j = layout.fixed[row]
            if j is None:
                raise NotAFunctionError(f"row {row} is all-zero")
            h[row] = layout.columns[j]
    return Mapping(h)


def detect_trivial(inst: ProblemInstance, q1: Query, q2: Query):
    """Settle constant polynomials; None when the instance needs a solver."""
    if not inst.p.is_constant:
        return None
    value = inst.p.constant_term
    if value != inst.d:
        return NotContained("trivial", detail=f"polynomial is constant {value} != d = {inst.d}")
    if inst.layout.num_columns == 0:
        x = []
    else:
        # every feasible point attains d; the all-first-column matrix is one of them
        x = [0] * inst.num_vars
        for g in inst.layout.groups():
            x[g[0]] = 1
    try:
        h = extract_witness(x, inst.layout)
    except NotAFunctionError:
        return None
    if not is_homomorphism(h, q2, q1):
        return None
    return Contained(h, "trivial", q1, q2)
