"""Sparse square-free polynomials over binary variables, QUBO export and Ising conversion."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np


class NotQuboError(ValueError):
    """Raised when a polynomial of degree > 2 is asked for its QUBO matrix."""

    def __init__(self, monomial: "Monomial"):
        super().__init__(f"degree {len(monomial.variables)} monomial {monomial} is not quadratic")
        self.monomial = monomial


@dataclass(frozen=True, order=True)
class Monomial:
    variables: tuple[int, ...]
    coefficient: int

    def __post_init__(self):
        vs = tuple(sorted(set(int(v) for v in self.variables)))
        if any(v < 0 for v in vs):
            raise ValueError("variable ids must be non-negative")
        object.__setattr__(self, "variables", vs)
        object.__setattr__(self, "coefficient", int(self.coefficient))

    @property
    def degree(self) -> int:
        return len(self.variables)

    def __str__(self) -> str:
        if not self.variables:
            return str(self.coefficient)
        return f"{self.coefficient}*" + "*".join(f"x{v}" for v in self.variables)


def _collect(items: Iterable[tuple[Iterable[int], int]]) -> dict[tuple[int, ...], int]:
    terms: dict[tuple[int, ...], int] = {}
    for variables, coef in items:
        key = tuple(sorted(set(variables)))  # x*x = x
        terms[key] = terms.get(key, 0) + int(coef)
    return {k: c for k, c in terms.items() if c != 0}


class BinaryPolynomial:
    """Integer-coefficient multilinear polynomial keyed by variable sets.

    Immutable once built. Variables are flat ids in ``range(num_vars)``.
    """

    __slots__ = ("_terms", "num_vars", "_arrays")

    def __init__(self, terms: Mapping[Iterable[int], int] | Iterable[Monomial] = (), num_vars: int | None = None):
        if isinstance(terms, Mapping):
            items = list(terms.items())
        else:
            items = [(m.variables, m.coefficient) for m in terms]
        collected = _collect(items)
        top = max((max(k) for k in collected if k), default=-1) + 1
        if num_vars is None:
            num_vars = top
        if num_vars < top:
            raise ValueError(f"variable id {top - 1} out of range for {num_vars} variables")
        self._terms = dict(sorted(collected.items(), key=lambda kv: (len(kv[0]), kv[0])))
        self.num_vars = int(num_vars)
        self._arrays = None

    # construction helpers
    @classmethod
    def constant(cls, value: int, num_vars: int = 0) -> "BinaryPolynomial":
        return cls({(): value}, num_vars)

    @classmethod
    def zero(cls, num_vars: int = 0) -> "BinaryPolynomial":
        return cls({}, num_vars)

    @classmethod
    def normalize(cls, monomials: Iterable[Monomial], num_vars: int | None = None) -> "BinaryPolynomial":
        """Merge duplicate variable sets and drop zero coefficients."""
        return cls(list(monomials), num_vars)

    @property
    def terms(self) -> dict[tuple[int, ...], int]:
        return dict(self._terms)

    @property
    def monomials(self) -> list[Monomial]:
        return [Monomial(k, c) for k, c in sorted(self._terms.items())]

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryPolynomial):
            return NotImplemented
        return self.num_vars == other.num_vars and self._terms == other._terms

    def __hash__(self):
        return hash((self.num_vars, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        body = " + ".join(str(m) for m in self.monomials) or "0"
        return f"BinaryPolynomial({body}; n={self.num_vars})"

    def coefficient(self, variables: Iterable[int]) -> int:
        return self._terms.get(tuple(sorted(set(variables))), 0)

    @property
    def constant_term(self) -> int:
        return self._terms.get((), 0)

    @property
    def degree(self) -> int:
        return max((len(k) for k in self._terms), default=0)

    @property
    def is_constant(self) -> bool:
        return all(not k for k in self._terms)

    def used_variables(self) -> set[int]:
        return {v for k in self._terms for v in k}

    # arithmetic
    def _check(self, other: "BinaryPolynomial") -> int:
        return max(self.num_vars, other.num_vars)

    def __add__(self, other):
        if isinstance(other, int):
            other = BinaryPolynomial.constant(other, self.num_vars)
        if not isinstance(other, BinaryPolynomial):
            return NotImplemented
        return BinaryPolynomial(
            [Monomial(k, c) for k, c in self._terms.items()]
            + [Monomial(k, c) for k, c in other._terms.items()],
            self._check(other),
        )

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor: int) -> "BinaryPolynomial":
        return BinaryPolynomial({k: c * int(factor) for k, c in self._terms.items()}, self.num_vars)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return self.scale(int(other))
        if not isinstance(other, BinaryPolynomial):
            return NotImplemented
        items = [
            (a + b, ca * cb)
            for a, ca in self._terms.items()
            for b, cb in other._terms.items()
        ]
        return BinaryPolynomial(dict(_collect(items)), self._check(other))

    __rmul__ = __mul__

    def add(self, other: "BinaryPolynomial") -> "BinaryPolynomial":
        return self + other

    def with_num_vars(self, num_vars: int) -> "BinaryPolynomial":
        return BinaryPolynomial(self._terms, num_vars)

    # evaluation
    def evaluate(self, x: Sequence[int]) -> int:
        if len(x) != self.num_vars:
            raise ValueError(f"assignment has length {len(x)}, expected {self.num_vars}")
        total = 0
        for k, c in self._terms.items():
            if all(x[v] for v in k):
                total += c
        return total

    def evaluate_many(self, xs) -> np.ndarray:
        """Vectorised evaluation on a (m, n) 0/1 array."""
        xs = np.asarray(xs, dtype=np.int8)
        if xs.ndim != 2 or xs.shape[1] != self.num_vars:
            raise ValueError(f"expected shape (m, {self.num_vars}), got {xs.shape}")
        out = np.zeros(xs.shape[0], dtype=np.int64)
        for k, c in self._terms.items():
            if k:
                out += c * np.all(xs[:, list(k)] == 1, axis=1)
            else:
                out += c
        return out

    def csr_arrays(self):
        """Flat arrays for the compiled kernels.

        Returns ``(coef, mono_ptr, mono_vars, var_ptr, var_monos)`` where monomial
        ``m`` covers ``mono_vars[mono_ptr[m]:mono_ptr[m+1]]`` and variable ``v``
        appears in ``var_monos[var_ptr[v]:var_ptr[v+1]]``. The constant term is
        excluded.
        """
        if self._arrays is None:
            keys = [k for k in self._terms if k]
            coef = np.array([self._terms[k] for k in keys], dtype=np.int64)
            mono_ptr = np.zeros(len(keys) + 1, dtype=np.int64)
            mono_ptr[1:] = np.cumsum([len(k) for k in keys])
            mono_vars = np.array([v for k in keys for v in k], dtype=np.int64)
            per_var: list[list[int]] = [[] for _ in range(self.num_vars)]
            for m, k in enumerate(keys):
                for v in k:
                    per_var[v].append(m)
            var_ptr = np.zeros(self.num_vars + 1, dtype=np.int64)
            var_ptr[1:] = np.cumsum([len(ms) for ms in per_var])
            var_monos = np.array([m for ms in per_var for m in ms], dtype=np.int64)
            self._arrays = (coef, mono_ptr, mono_vars, var_ptr, var_monos)
        return self._arrays

    # serialization
    def to_json(self) -> dict:
        return {
            "num_vars": self.num_vars,
            "monomials": [{"coef": m.coefficient, "vars": list(m.variables)} for m in self.monomials],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data: dict) -> "BinaryPolynomial":
        return cls([Monomial(tuple(m["vars"]), m["coef"]) for m in data["monomials"]], data["num_vars"])


def evaluate(p: BinaryPolynomial, x: Sequence[int]) -> int:
    return p.evaluate(x)


# --------------------------------------------------------------------------- QUBO / Ising


def to_qubo(p: BinaryPolynomial) -> tuple[np.ndarray, int]:
    """Upper-triangular ``Q`` and constant ``c0`` with ``x^T Q x + c0 == p(x)``."""
    n = p.num_vars
    Q = np.zeros((n, n), dtype=np.int64)
    for m in p.monomials:
        if m.degree > 2:
            raise NotQuboError(m)
        if m.degree == 1:
            (i,) = m.variables
            Q[i, i] += m.coefficient
        elif m.degree == 2:
            i, j = m.variables
            Q[i, j] += m.coefficient
    return Q, p.constant_term


def qubo_coordinates(Q) -> list[tuple[int, int, int]]:
    Q = np.asarray(Q)
    return [(int(i), int(j), Q[i, j].item()) for i, j in zip(*np.nonzero(Q))]


def qubo_from_coordinates(n: int, coords: Iterable[Sequence]) -> np.ndarray:
    Q = np.zeros((n, n), dtype=np.int64)
    for i, j, q in coords:
        if i > j:
            i, j = j, i
        Q[i, j] += q
    return Q


def bits_to_spins(x: Sequence[int]) -> list[int]:
    return [1 - 2 * int(b) for b in x]


def spins_to_bits(s: Sequence[int]) -> list[int]:
    return [(1 - int(v)) // 2 for v in s]


@dataclass(frozen=True)
class IsingModel:
    """``E(s) = sum h_i s_i + sum_{i<j} J_ij s_i s_j`` with ``s_i = 1 - 2 x_i``.

    ``const`` carries the polynomial's constant term, so that
    ``p(x) = E(s) - K + const`` where ``K = sum J + sum h``.
    """

    num_vars: int
    h: Mapping[int, Fraction] = field(default_factory=dict)
    J: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)
    const: Fraction = Fraction(0)

    def __post_init__(self):
        for i, j in self.J:
            if not 0 <= i < j < self.num_vars:
                raise ValueError(f"coupling key {(i, j)} must satisfy 0 <= i < j < n")
        object.__setattr__(self, "h", {i: Fraction(v) for i, v in sorted(self.h.items()) if v != 0})
        object.__setattr__(self, "J", {k: Fraction(v) for k, v in sorted(self.J.items()) if v != 0})
        object.__setattr__(self, "const", Fraction(self.const))

    @property
    def K(self) -> Fraction:
        return sum(self.J.values(), Fraction(0)) + sum(self.h.values(), Fraction(0))

    def energy(self, s: Sequence[int]) -> Fraction:
        e = Fraction(0)
        for i, v in self.h.items():
            e += v * s[i]
        for (i, j), v in self.J.items():
            e += v * s[i] * s[j]
        return e

    def fields(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense float ``h`` vector and upper-triangular ``J`` matrix."""
        h = np.zeros(self.num_vars)
        J = np.zeros((self.num_vars, self.num_vars))
        for i, v in self.h.items():
            h[i] = float(v)
        for (i, j), v in self.J.items():
            J[i, j] = float(v)
        return h, J


def qubo_to_ising(Q, c0=0) -> IsingModel:
    Q = np.asarray(Q, dtype=object)
    n = Q.shape[0]
    if Q.shape != (n, n):
        raise ValueError("Q must be square")
    if any(Q[i, j] != 0 for i in range(n) for j in range(i)):
        raise ValueError("Q must be upper-triangular")
    J = {(i, j): Fraction(Q[i, j]) / 4 for i in range(n) for j in range(i + 1, n) if Q[i, j] != 0}
    h = {}
    for i in range(n):
        around = sum((J.get((k, i), 0) for k in range(i)), Fraction(0))
        around += sum((J.get((i, k), 0) for k in range(i + 1, n)), Fraction(0))
        h[i] = -(Fraction(Q[i, i]) + 2 * around) / 2
    return IsingModel(n, h, J, Fraction(c0))


def ising_to_qubo(m: IsingModel) -> tuple[np.ndarray, Fraction]:
    n = m.num_vars
    Q = np.zeros((n, n), dtype=object)
    Q[:] = Fraction(0)
    for (i, j), v in m.J.items():
        Q[i, j] = 4 * v
    for i in range(n):
        around = sum((m.J.get((k, i), 0) for k in range(i)), Fraction(0))
        around += sum((m.J.get((i, k), 0) for k in range(i + 1, n)), Fraction(0))
        Q[i, i] = -2 * m.h.get(i, Fraction(0)) - 2 * around
    return Q, m.const


def polynomial_to_ising(p: BinaryPolynomial) -> IsingModel:
    return qubo_to_ising(*to_qubo(p))
