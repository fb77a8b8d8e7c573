"""Exhaustive minimisation over the full search space."""

from __future__ import annotations

import numpy as np

from .. import _kernels
from ..reduce import ProblemInstance
from .samples import indices_to_bits

DEFAULT_CAP = 2**24


class SearchSpaceTooLarge(RuntimeError):
    pass


def all_energies(p, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Energy of every bitvector, indexed so that integer order is lexicographic order."""
    n = p.num_vars
    if 2**n > cap:
        raise SearchSpaceTooLarge(f"2^{n} states exceed the cap of {cap}")
    coef, mono_ptr, mono_vars, _, _ = p.csr_arrays()
    return _kernels.energies_all(n, coef, mono_ptr, mono_vars, p.constant_term)


def grid_energies(p, groups, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Energies over one-hot assignments as an array indexed by the chosen column per group."""
    shape = tuple(len(g) for g in groups)
    size = int(np.prod(shape, dtype=object)) if shape else 1
    if size > cap:
        raise SearchSpaceTooLarge(f"{size} one-hot states exceed the cap of {cap}")
    where = {}
    for gi, g in enumerate(groups):
        for ci, v in enumerate(g):
            where[v] = (gi, ci)
    if len(where) != p.num_vars:
        raise ValueError("groups must partition the variables")
    grid = np.full(shape, p.constant_term, dtype=np.int64)
    for m in p.monomials:
        if not m.variables:
            continue
        index: list = [slice(None)] * len(shape)
        ok = True
        for v in m.variables:
            gi, ci = where[v]
            if index[gi] != slice(None):  # two columns of one row are never both set
                ok = False
                break
            index[gi] = ci
        if ok:
            grid[tuple(index)] += m.coefficient
    return grid


def onehot_bits(cols, groups, n: int) -> tuple[int, ...]:
    x = [0] * n
    for g, c in zip(groups, cols):
        x[g[c]] = 1
    return tuple(x)


def brute_force_min(inst: ProblemInstance, cap: int = DEFAULT_CAP) -> tuple[int, list[tuple[int, ...]]]:
    """Exact minimum and all minimisers in lexicographic order."""
    n = inst.num_vars
    if inst.constrained:
        grid = grid_energies(inst.p, inst.groups, cap)
        best = int(grid.min())
        hits = np.argwhere(grid == best)
        xs = sorted(onehot_bits(c, inst.groups, n) for c in hits.tolist())
        return best, xs
    energies = all_energies(inst.p, cap)
    best = int(energies.min())
    hits = np.flatnonzero(energies == best)
    return best, [tuple(r) for r in indices_to_bits(hits, n).tolist()]
