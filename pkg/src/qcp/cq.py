"""Tableau conjunctive queries, database instances and exact homomorphism oracles."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping as TypingMapping

DEFAULT_ORACLE_CAP = 10**8


class QueryFormatError(ValueError):
    """Malformed query or database file."""


class OracleOverflow(RuntimeError):
    """The exhaustive homomorphism search space exceeds the configured cap."""


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Constant:
    value: str

    def __str__(self) -> str:
        return f"'{self.value}'"


Term = Variable | Constant


def _natural_key(text: str) -> tuple:
    parts = re.split(r"(\d+)", text)
    return tuple(int(p) if p.isdigit() else p for p in parts)


def term_key(term: Term) -> tuple:
    """Canonical order: variables before constants, then case-insensitive natural order.

    Digit runs compare numerically, so ``y2 < y10``.
    """
    if isinstance(term, Variable):
        return (0, _natural_key(term.name.casefold()), term.name)
    return (1, _natural_key(term.value.casefold()), term.value)


def tuple_key(tup: tuple[Term, ...]) -> tuple:
    return tuple(term_key(t) for t in tup)


def encode_term(term: Term) -> str:
    if isinstance(term, Variable):
        return "?" + term.name
    return f"'{term.value}'"


def decode_term(raw: str) -> Term:
    """``"?x"`` is a variable; anything else a constant, one pair of quotes stripped."""
    if not isinstance(raw, str):
        raise QueryFormatError(f"term must be a string, got {raw!r}")
    if raw.startswith("?"):
        if len(raw) == 1:
            raise QueryFormatError("empty variable name '?'")
        return Variable(raw[1:])
    if len(raw) >= 2 and raw[0] == raw[-1] == "'":
        raw = raw[1:-1]
    return Constant(raw)


@dataclass(frozen=True)
class Schema:
    relations: TypingMapping[str, int]

    def __post_init__(self):
        for name, arity in self.relations.items():
            if not isinstance(arity, int) or isinstance(arity, bool) or arity < 0:
                raise QueryFormatError(f"relation {name!r} has invalid arity {arity!r}")
        object.__setattr__(self, "relations", dict(sorted(self.relations.items())))

    def __hash__(self):
        return hash(tuple(self.relations.items()))

    def arity(self, relation: str) -> int:
        try:
            return self.relations[relation]
        except KeyError:
            raise QueryFormatError(f"unknown relation {relation!r}") from None

    @property
    def names(self) -> list[str]:
        return list(self.relations)


@dataclass(frozen=True)
class Query:
    schema: Schema
    tableau: TypingMapping[str, frozenset]
    answer: tuple[Term, ...] = ()

    def __post_init__(self):
        tableau = {}
        for rel in self.schema.names:
            tuples = frozenset(tuple(t) for t in self.tableau.get(rel, ()))
            arity = self.schema.arity(rel)
            for tup in tuples:
                if len(tup) != arity:
                    raise QueryFormatError(
                        f"arity mismatch in {rel}: {tuple(map(str, tup))} has "
                        f"{len(tup)} terms, expected {arity}"
                    )
            tableau[rel] = tuples
        extra = set(self.tableau) - set(tableau)
        if extra:
            raise QueryFormatError(f"relations not in schema: {sorted(extra)}")
        object.__setattr__(self, "tableau", tableau)
        object.__setattr__(self, "answer", tuple(self.answer))
        missing = {t for t in self.answer if isinstance(t, Variable)} - self.variables
        if missing:
            names = sorted(v.name for v in missing)
            raise QueryFormatError(f"answer variables not in tableau: {names}")

    def __hash__(self):
        return hash((self.schema, tuple((r, self.tableau[r]) for r in self.tableau), self.answer))

    def tuples(self, relation: str) -> list[tuple[Term, ...]]:
        """Tuples of one relation in canonical order."""
        return sorted(self.tableau[relation], key=tuple_key)

    @property
    def variables(self) -> frozenset[Variable]:
        return frozenset(
            t for tuples in self.tableau.values() for tup in tuples for t in tup
            if isinstance(t, Variable)
        )

    @property
    def constants(self) -> frozenset[Constant]:
        return frozenset(
            t for tuples in self.tableau.values() for tup in tuples for t in tup
            if isinstance(t, Constant)
        )

    @property
    def active_domain(self) -> frozenset[Constant]:
        return self.constants | {t for t in self.answer if isinstance(t, Constant)}

    @property
    def terms(self) -> list[Term]:
        """Vars(q) union Adom(q), canonically sorted."""
        return sorted(self.variables | self.active_domain, key=term_key)

    @property
    def size(self) -> int:
        return sum(len(t) for t in self.tableau.values())

    def to_json(self) -> dict:
        return {
            "tableau": {
                rel: [[encode_term(t) for t in tup] for tup in self.tuples(rel)]
                for rel in self.schema.names
                if self.tableau[rel]
            },
            "answer": [encode_term(t) for t in self.answer],
        }


@dataclass(frozen=True)
class DatabaseInstance:
    relations: TypingMapping[str, frozenset]

    def __post_init__(self):
        rels = {}
        for name, tuples in self.relations.items():
            frozen = frozenset(tuple(t) for t in tuples)
            for tup in frozen:
                if not all(isinstance(t, Constant) for t in tup):
                    raise QueryFormatError(f"database tuple {tup} in {name} contains a non-constant")
            rels[name] = frozen
        object.__setattr__(self, "relations", rels)

    def get(self, relation: str) -> frozenset:
        return self.relations.get(relation, frozenset())

    def check_schema(self, schema: Schema) -> None:
        for name, tuples in self.relations.items():
            arity = schema.arity(name)
            for tup in tuples:
                if len(tup) != arity:
                    raise QueryFormatError(f"arity mismatch in database relation {name}")


@dataclass(frozen=True)
class Mapping:
    """A total function on terms, used as a candidate homomorphism."""

    assignments: TypingMapping[Term, Term] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "assignments", dict(self.assignments))

    def __hash__(self):
        return hash(frozenset(self.assignments.items()))

    def __getitem__(self, term: Term) -> Term:
        return self.assignments[term]

    def __contains__(self, term: Term) -> bool:
        return term in self.assignments

    def __len__(self) -> int:
        return len(self.assignments)

    def apply(self, tup: Iterable[Term]) -> tuple[Term, ...]:
        return tuple(self.assignments[t] for t in tup)

    def items(self):
        return sorted(self.assignments.items(), key=lambda kv: term_key(kv[0]))

    def to_json(self) -> dict[str, str]:
        return {encode_term(k): encode_term(v) for k, v in self.items()}

    @classmethod
    def from_json(cls, data: dict[str, str]) -> "Mapping":
        return cls({decode_term(k): decode_term(v) for k, v in data.items()})

    def __str__(self) -> str:
        return "{" + ", ".join(f"{k}->{v}" for k, v in self.items()) + "}"


# --------------------------------------------------------------------------- parsing


def _parse_tuple_list(raw, where: str) -> list[tuple[Term, ...]]:
    if not isinstance(raw, list):
        raise QueryFormatError(f"{where}: expected a list of tuples")
    out = []
    for tup in raw:
        if not isinstance(tup, list):
            raise QueryFormatError(f"{where}: expected a list of terms, got {tup!r}")
        out.append(tuple(decode_term(t) for t in tup))
    return out


def _parse_query(raw, schema: Schema, label: str) -> Query:
    if not isinstance(raw, dict):
        raise QueryFormatError(f"{label}: expected an object")
    tableau_raw = raw.get("tableau", {})
    if not isinstance(tableau_raw, dict):
        raise QueryFormatError(f"{label}.tableau: expected an object")
    tableau = {}
    for rel, tuples in tableau_raw.items():
        schema.arity(rel)
        tableau[rel] = _parse_tuple_list(tuples, f"{label}.tableau.{rel}")
    answer = raw.get("answer", [])
    if not isinstance(answer, list):
        raise QueryFormatError(f"{label}.answer: expected a list")
    return Query(schema, tableau, tuple(decode_term(t) for t in answer))


def _load_json(text: bytes | str):
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise QueryFormatError(f"not UTF-8 at byte {exc.start}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise QueryFormatError(
            f"syntax error at line {exc.lineno} column {exc.colno} (char {exc.pos}): {exc.msg}"
        ) from None


def parse_schema(raw) -> Schema:
    if not isinstance(raw, dict):
        raise QueryFormatError("schema: expected an object of relation -> arity")
    return Schema(dict(raw))


def parse_query_pair(text: bytes | str) -> tuple[Query, Query]:
    """Parse a pair file ``{"schema": ..., "q1": ..., "q2": ...}``."""
    data = _load_json(text)
    if not isinstance(data, dict):
        raise QueryFormatError("top level must be an object")
    for key in ("schema", "q1", "q2"):
        if key not in data:
            raise QueryFormatError(f"missing key {key!r}")
    schema = parse_schema(data["schema"])
    return _parse_query(data["q1"], schema, "q1"), _parse_query(data["q2"], schema, "q2")


def dump_query_pair(q1: Query, q2: Query, **extra) -> str:
    if q1.schema != q2.schema:
        raise ValueError("queries must share a schema")
    data = {"schema": dict(q1.schema.relations), "q1": q1.to_json(), "q2": q2.to_json()}
    data.update(extra)
    return json.dumps(data, indent=2)


def parse_database(text: bytes | str, schema: Schema | None = None) -> DatabaseInstance:
    data = _load_json(text)
    if not isinstance(data, dict):
        raise QueryFormatError("database must be an object of relation -> tuples")
    db = DatabaseInstance({rel: _parse_tuple_list(t, rel) for rel, t in data.items()})
    if schema is not None:
        db.check_schema(schema)
    return db


# --------------------------------------------------------------------------- oracles


def is_homomorphism(h: Mapping, q2: Query, q1: Query) -> bool:
    """Check the three homomorphism conditions for ``h`` from ``q2`` to ``q1``."""
    missing = [t for t in q2.terms if t not in h]
    if missing:
        raise ValueError(f"mapping is not total on q2: missing {[str(t) for t in missing]}")
    for c in q2.active_domain:
        if h[c] != c:
            return False
    if h.apply(q2.answer) != q1.answer:
        return False
    for rel, tuples in q2.tableau.items():
        target = q1.tableau.get(rel, frozenset())
        for u in tuples:
            if h.apply(u) not in target:
                return False
    return True


def find_homomorphism(q2: Query, q1: Query, cap: int | None = DEFAULT_ORACLE_CAP) -> Mapping | None:
    """Exhaustive search for a homomorphism from ``q2`` to ``q1``.

    Candidates are enumerated lexicographically (sorted q2 terms, each ranging over
    the sorted q1 terms); the first valid one is returned. Partial assignments are
    pruned as soon as a fully assigned tuple fails, which does not change which
    candidate is found first.
    """
    if q1.schema != q2.schema:
        raise ValueError("queries must share a schema")
    domain = q2.terms
    codomain = q1.terms
    if cap is not None and domain and len(codomain) ** len(domain) > cap:
        raise OracleOverflow(
            f"{len(codomain)}^{len(domain)} candidate mappings exceed the cap of {cap}"
        )
    if len(q2.answer) != len(q1.answer):
        return None
    position = {t: i for i, t in enumerate(domain)}

    # each check fires at the depth where its last term is assigned
    checks: list[list[tuple[tuple, frozenset | tuple]]] = [[] for _ in domain]
    if q2.answer:
        checks[max(position[t] for t in q2.answer)].append((q2.answer, ("answer",)))
    for rel, tuples in q2.tableau.items():
        target = q1.tableau[rel]
        for u in tuples:
            if not u:
                if not target:
                    return None
                continue
            checks[max(position[t] for t in u)].append((u, target))

    choices = []
    for t in domain:
        if isinstance(t, Constant):
            choices.append([t] if t in set(codomain) else [])
        else:
            choices.append(codomain)

    assignment: dict[Term, Term] = {}

    def consistent(depth: int) -> bool:
        for tup, target in checks[depth]:
            image = tuple(assignment[t] for t in tup)
            if target == ("answer",):
                if image != q1.answer:
                    return False
            elif image not in target:
                return False
        return True

    def search(depth: int) -> bool:
        if depth == len(domain):
            return True
        term = domain[depth]
        for value in choices[depth]:
            assignment[term] = value
            if consistent(depth) and search(depth + 1):
                return True
        assignment.pop(term, None)
        return False

    if search(0):
        h = Mapping(dict(assignment))
        # pruning is only an optimization; the full check stays authoritative
        return h if is_homomorphism(h, q2, q1) else None
    return None


def decide_containment_oracle(q1: Query, q2: Query, cap: int | None = DEFAULT_ORACLE_CAP) -> bool:
    """``q1`` is contained in ``q2`` iff a homomorphism from ``q2`` to ``q1`` exists."""
    return find_homomorphism(q2, q1, cap=cap) is not None


def _embeddings(q: Query, db: DatabaseInstance) -> Iterator[dict[Variable, Constant]]:
    atoms = [(rel, u) for rel in q.schema.names for u in q.tuples(rel)]
    # most selective relations first
    atoms.sort(key=lambda a: len(db.get(a[0])))

    def extend(i: int, val: dict) -> Iterator[dict]:
        if i == len(atoms):
            yield val
            return
        rel, u = atoms[i]
        for fact in db.get(rel):
            new = dict(val)
            ok = True
            for term, value in zip(u, fact):
                if isinstance(term, Constant):
                    if term != value:
                        ok = False
                        break
                elif new.setdefault(term, value) != value:
                    ok = False
                    break
            if ok:
                yield from extend(i + 1, new)

    yield from extend(0, {})


def evaluate_query(q: Query, db: DatabaseInstance) -> set[tuple[Constant, ...]]:
    """Set-semantics result of ``q`` on ``db``."""
    db.check_schema(q.schema)
    return {
        tuple(t if isinstance(t, Constant) else nu[t] for t in q.answer)
        for nu in _embeddings(q, db)
    }


def canonical_database(q: Query) -> tuple[DatabaseInstance, tuple[Constant, ...]]:
    """Freeze each variable into a fresh constant; returns the db and the frozen answer."""
    used = {c.value for c in q.active_domain}
    frozen = {}
    for v in sorted(q.variables, key=term_key):
        name = "_" + v.name
        while name in used:
            name = "_" + name
        used.add(name)
        frozen[v] = Constant(name)

    def freeze(t: Term) -> Constant:
        return frozen[t] if isinstance(t, Variable) else t

    db = DatabaseInstance({
        rel: [tuple(freeze(t) for t in u) for u in tuples] for rel, tuples in q.tableau.items()
    })
    return db, tuple(freeze(t) for t in q.answer)
