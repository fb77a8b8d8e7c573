"""Sample sets returned by every solver."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from ..poly import BinaryPolynomial


@dataclass(frozen=True)
class Sample:
    assignment: tuple[int, ...]
    energy: int
    count: int

    @property
    def bits(self) -> str:
        return "".join(map(str, self.assignment))


@dataclass
class SampleSet:
    entries: list[Sample]
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_assignments(cls, p: BinaryPolynomial, assignments, counts: Iterable[int] | None = None,
                         metadata: dict | None = None) -> "SampleSet":
        """Aggregate duplicate assignments; energies are recomputed from ``p``."""
        arr = np.asarray(assignments, dtype=np.int8).reshape(len(assignments), p.num_vars)
        weights = np.ones(arr.shape[0], dtype=np.int64) if counts is None else np.asarray(list(counts), dtype=np.int64)
        tally: dict[tuple[int, ...], int] = {}
        for row, c in zip(map(tuple, arr.tolist()), weights.tolist()):
            if c:
                tally[row] = tally.get(row, 0) + c
        keys = list(tally)
        energies = p.evaluate_many(np.array(keys, dtype=np.int8).reshape(len(keys), p.num_vars)) if keys else []
        entries = [Sample(k, int(e), tally[k]) for k, e in zip(keys, energies)]
        entries.sort(key=lambda s: (s.energy, s.assignment))
        return cls(entries, dict(metadata or {}))

    @property
    def total(self) -> int:
        return sum(s.count for s in self.entries)

    @property
    def lowest(self) -> Sample | None:
        return self.entries[0] if self.entries else None

    def at_energy(self, energy: int) -> list[Sample]:
        return [s for s in self.entries if s.energy == energy]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["assignment_bits", "energy", "count"])
        for s in self.entries:
            w.writerow([s.bits, s.energy, s.count])
        return buf.getvalue()

    def sidecar(self) -> dict:
        return _jsonable(self.metadata)

    def write(self, csv_path, sidecar_path=None) -> None:
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv())
        if sidecar_path is not None:
            with open(sidecar_path, "w", encoding="utf-8") as fh:
                json.dump(self.sidecar(), fh, indent=2, sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def solution_probability(samples: SampleSet, d: int) -> Fraction:
    total = samples.total
    if total == 0:
        raise ValueError("empty sample set")
    return Fraction(sum(s.count for s in samples.entries if s.energy == d), total)


def at_least_one_probability(p: float, trials: int) -> float:
    """Probability that at least one of ``trials`` independent measurements succeeds."""
    return 1.0 - (1.0 - float(p)) ** trials


def bits_of(index: int, n: int) -> tuple[int, ...]:
    """Variable ``i`` is bit ``n-1-i`` of ``index``; integer order is lexicographic order."""
    return tuple((index >> (n - 1 - i)) & 1 for i in range(n))


def index_of(bits: Sequence[int]) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def indices_to_bits(indices, n: int) -> np.ndarray:
    indices = np.asarray(indices, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((indices[:, None] >> shifts[None, :]) & 1).astype(np.int8)
