"""Decision outcomes."""

from __future__ import annotations

import enum
from dataclasses import InitVar, dataclass, field

from .cq import Mapping, Query, is_homomorphism


class RejectReason(enum.Enum):
    ANSWER_ARITY = "answer-arity"
    ANSWER_CONSTANT_MISMATCH = "answer-constant-mismatch"
    ANSWER_VARIABLE_CONFLICT = "answer-variable-conflict"
    EMPTY_RELATION = "empty-relation"
    NO_MATCHING_TUPLE = "no-matching-tuple"
    SIMPLIFICATION_CONFLICT = "simplification-conflict"


class EarlyReject(Exception):
    """Non-containment detected structurally, before any optimization."""

    def __init__(self, reason: RejectReason, detail: str = "", relation: str | None = None,
                 tuple_: tuple | None = None):
        super().__init__(f"{reason.value}: {detail}" if detail else reason.value)
        self.reason = reason
        self.detail = detail
        self.relation = relation
        self.tuple = tuple_

    def to_json(self) -> dict:
        out = {"reason": self.reason.value, "detail": self.detail}
        if self.relation is not None:
            out["relation"] = self.relation
            out["tuple"] = [str(t) for t in self.tuple or ()]
        return out


class FalsePositiveError(AssertionError):
    """A Contained verdict was about to be built from a mapping that is not a homomorphism."""


@dataclass(frozen=True)
class Contained:
    witness: Mapping
    source: str  # trivial | solver | brute-force
    q1: InitVar[Query]
    q2: InitVar[Query]
    solver: str | None = None
    exit_code: int = field(default=0, init=False)

    def __post_init__(self, q1: Query, q2: Query):
        if not is_homomorphism(self.witness, q2, q1):
            raise FalsePositiveError(f"witness {self.witness} is not a homomorphism from q2 to q1")

    @property
    def label(self) -> str:
        return "contained"

    def to_json(self) -> dict:
        return {"verdict": self.label, "source": self.source, "solver": self.solver,
                "witness": self.witness.to_json()}


@dataclass(frozen=True)
class NotContained:
    reason: str  # early-reject | trivial | exhaustive
    early_reject: EarlyReject | None = None
    detail: str = ""
    exit_code: int = field(default=1, init=False)

    @property
    def label(self) -> str:
        return "not-contained"

    def to_json(self) -> dict:
        out = {"verdict": self.label, "reason": self.reason, "detail": self.detail}
        if self.early_reject is not None:
            out["early_reject"] = self.early_reject.to_json()
        return out


@dataclass(frozen=True)
class Undetermined:
    best_energy: int | None
    d: int
    solver: str | None = None
    exit_code: int = field(default=2, init=False)

    @property
    def label(self) -> str:
        return "undetermined"

    def to_json(self) -> dict:
        return {"verdict": self.label, "best_energy": self.best_energy, "d": self.d,
                "solver": self.solver}


Verdict = Contained | NotContained | Undetermined
