"""Pure Python / numpy versions of the hot kernels.

Semantics match the compiled module exactly, including the order in which
random numbers are consumed, so both backends give identical results.
"""

import math

import numpy as np


def energies_all(n, coef, mono_ptr, mono_vars, constant):
    """Energy of every assignment; index bit ``n-1-i`` holds variable ``i``."""
    size = 1 << n
    table = np.zeros(size, dtype=np.int64)
    for m in range(len(coef)):
        mask = 0
        for t in range(mono_ptr[m], mono_ptr[m + 1]):
            mask |= 1 << (n - 1 - int(mono_vars[t]))
        table[mask] += coef[m]
    # subset-sum transform: table[S] = sum of coefficients of monomials inside S
    for b in range(n):
        view = table.reshape(-1, 2, 1 << b)
        view[:, 1, :] += view[:, 0, :]
    table += constant
    return table


def strict_local_minima(energies, n):
    """Boolean mask of states whose every single-bit neighbour is strictly higher."""
    energies = np.asarray(energies, dtype=np.int64)
    mask = np.ones(energies.shape[0], dtype=bool)
    for b in range(n):
        view = energies.reshape(-1, 2, 1 << b)
        lo, hi = view[:, 0, :], view[:, 1, :]
        m = mask.reshape(-1, 2, 1 << b)
        m[:, 0, :] &= hi > lo
        m[:, 1, :] &= lo > hi
    return mask


def _init_ones(x, coef, mono_ptr, mono_vars):
    ones = np.zeros(len(coef), dtype=np.int64)
    for m in range(len(coef)):
        s = 0
        for t in range(mono_ptr[m], mono_ptr[m + 1]):
            s += x[mono_vars[t]]
        ones[m] = s
    return ones


def _flip_delta(v, x, ones, coef, mono_ptr, var_ptr, var_monos):
    delta = 0
    if x[v]:
        for t in range(var_ptr[v], var_ptr[v + 1]):
            m = var_monos[t]
            if ones[m] == mono_ptr[m + 1] - mono_ptr[m]:
                delta -= coef[m]
    else:
        for t in range(var_ptr[v], var_ptr[v + 1]):
            m = var_monos[t]
            if ones[m] == mono_ptr[m + 1] - mono_ptr[m] - 1:
                delta += coef[m]
    return delta


def _apply_flip(v, x, ones, var_ptr, var_monos):
    step = -1 if x[v] else 1
    x[v] = 1 - x[v]
    for t in range(var_ptr[v], var_ptr[v + 1]):
        ones[var_monos[t]] += step


def _accept(delta, beta, u, greedy):
    if delta < 0:
        return True
    if greedy:
        return delta == 0
    return math.exp(-delta * beta) > u


def anneal_flip(x, betas, picks, uniforms, per_sweep, coef, mono_ptr, mono_vars,
                var_ptr, var_monos, greedy):
    """Single-bit-flip Metropolis annealing; mutates ``x`` in place."""
    coef = coef.tolist()
    mono_ptr = mono_ptr.tolist()
    var_ptr = var_ptr.tolist()
    var_monos = var_monos.tolist()
    xs = x.tolist()
    ones = _init_ones(xs, coef, mono_ptr, mono_vars.tolist()).tolist()
    picks = picks.tolist()
    uniforms = uniforms.tolist()
    step = 0
    for beta in betas.tolist():
        for _ in range(per_sweep):
            v = picks[step]
            delta = _flip_delta(v, xs, ones, coef, mono_ptr, var_ptr, var_monos)
            if _accept(delta, beta, uniforms[step], greedy):
                _apply_flip(v, xs, ones, var_ptr, var_monos)
            step += 1
    x[:] = xs


def anneal_onehot(cols, offsets, sizes, betas, picks, alts, uniforms, per_sweep,
                  coef, mono_ptr, mono_vars, var_ptr, var_monos, greedy):
    """One-hot annealing: move one group's 1 to another column; mutates ``cols``."""
    coef = coef.tolist()
    mono_ptr = mono_ptr.tolist()
    var_ptr = var_ptr.tolist()
    var_monos = var_monos.tolist()
    offsets = offsets.tolist()
    sizes = sizes.tolist()
    cs = cols.tolist()
    n = len(var_ptr) - 1
    xs = [0] * n
    for g, c in enumerate(cs):
        xs[offsets[g] + c] = 1
    ones = _init_ones(xs, coef, mono_ptr, mono_vars.tolist()).tolist()
    picks = picks.tolist()
    alts = alts.tolist()
    uniforms = uniforms.tolist()
    step = 0
    for beta in betas.tolist():
        for _ in range(per_sweep):
            g = picks[step]
            size = sizes[g]
            if size > 1:
                cur = cs[g]
                new = (cur + 1 + alts[step]) % size
                a = offsets[g] + cur
                b = offsets[g] + new
                delta = _flip_delta(a, xs, ones, coef, mono_ptr, var_ptr, var_monos)
                _apply_flip(a, xs, ones, var_ptr, var_monos)
                delta += _flip_delta(b, xs, ones, coef, mono_ptr, var_ptr, var_monos)
                _apply_flip(b, xs, ones, var_ptr, var_monos)
                if _accept(delta, beta, uniforms[step], greedy):
                    cs[g] = new
                else:
                    _apply_flip(b, xs, ones, var_ptr, var_monos)
                    _apply_flip(a, xs, ones, var_ptr, var_monos)
            step += 1
    cols[:] = cs
