# cython: language_level=3
"""Compiled hot loops: landscape enumeration and simulated annealing sweeps."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.int8_t i8


def energies_all(int n, const i64[::1] coef, const i64[::1] mono_ptr,
                 const i64[::1] mono_vars, long long constant):
    cdef Py_ssize_t size = (<Py_ssize_t>1) << n
    table_arr = np.zeros(size, dtype=np.int64)
    cdef i64[::1] table = table_arr
    cdef Py_ssize_t m, t, s, b, half
    cdef i64 mask
    for m in range(coef.shape[0]):
        mask = 0
        for t in range(mono_ptr[m], mono_ptr[m + 1]):
            mask |= (<i64>1) << (n - 1 - mono_vars[t])
        table[mask] += coef[m]
    for b in range(n):
        half = (<Py_ssize_t>1) << b
        for s in range(size):
            if s & half:
                table[s] += table[s ^ half]
    for s in range(size):
        table[s] += constant
    return table_arr


def strict_local_minima(const i64[::1] energies, int n):
    cdef Py_ssize_t size = energies.shape[0]
    out_arr = np.ones(size, dtype=np.bool_)
    cdef cnp.npy_bool[::1] out = out_arr
    cdef Py_ssize_t s, b
    cdef i64 e
    for s in range(size):
        e = energies[s]
        for b in range(n):
            if energies[s ^ ((<Py_ssize_t>1) << b)] <= e:
                out[s] = 0
                break
    return out_arr


cdef inline i64 flip_delta(Py_ssize_t v, i8[::1] x, i64[::1] ones, const i64[::1] coef,
                           const i64[::1] mono_ptr, const i64[::1] var_ptr,
                           const i64[::1] var_monos) noexcept nogil:
    cdef i64 delta = 0
    cdef Py_ssize_t t, m
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


cdef inline void apply_flip(Py_ssize_t v, i8[::1] x, i64[::1] ones, const i64[::1] var_ptr,
                            const i64[::1] var_monos) noexcept nogil:
    cdef i64 step = -1 if x[v] else 1
    cdef Py_ssize_t t
    x[v] = 1 - x[v]
    for t in range(var_ptr[v], var_ptr[v + 1]):
        ones[var_monos[t]] += step


cdef inline bint accept(i64 delta, double beta, double u, bint greedy) noexcept nogil:
    if delta < 0:
        return True
    if greedy:
        return delta == 0
    return exp(-delta * beta) > u


cdef i64[::1] init_ones(i8[::1] x, const i64[::1] coef, const i64[::1] mono_ptr,
                        const i64[::1] mono_vars):
    ones_arr = np.zeros(coef.shape[0], dtype=np.int64)
    cdef i64[::1] ones = ones_arr
    cdef Py_ssize_t m, t
    for m in range(coef.shape[0]):
        for t in range(mono_ptr[m], mono_ptr[m + 1]):
            ones[m] += x[mono_vars[t]]
    return ones


def anneal_flip(i8[::1] x, const double[::1] betas, const i64[::1] picks,
                const double[::1] uniforms, Py_ssize_t per_sweep, const i64[::1] coef,
                const i64[::1] mono_ptr, const i64[::1] mono_vars, const i64[::1] var_ptr,
                const i64[::1] var_monos, bint greedy):
    cdef i64[::1] ones = init_ones(x, coef, mono_ptr, mono_vars)
    cdef Py_ssize_t k, r, v, step = 0
    cdef double beta
    cdef i64 delta
    with nogil:
        for k in range(betas.shape[0]):
            beta = betas[k]
            for r in range(per_sweep):
                v = picks[step]
                delta = flip_delta(v, x, ones, coef, mono_ptr, var_ptr, var_monos)
                if accept(delta, beta, uniforms[step], greedy):
                    apply_flip(v, x, ones, var_ptr, var_monos)
                step += 1


def anneal_onehot(i64[::1] cols, const i64[::1] offsets, const i64[::1] sizes,
                  const double[::1] betas, const i64[::1] picks, const i64[::1] alts,
                  const double[::1] uniforms, Py_ssize_t per_sweep, const i64[::1] coef,
                  const i64[::1] mono_ptr, const i64[::1] mono_vars, const i64[::1] var_ptr,
                  const i64[::1] var_monos, bint greedy):
    cdef Py_ssize_t n = var_ptr.shape[0] - 1
    x_arr = np.zeros(n, dtype=np.int8)
    cdef i8[::1] x = x_arr
    cdef Py_ssize_t g, k, r, a, b, step = 0
    cdef i64 size, cur, new, delta
    cdef double beta
    for g in range(cols.shape[0]):
        x[offsets[g] + cols[g]] = 1
    cdef i64[::1] ones = init_ones(x, coef, mono_ptr, mono_vars)
    with nogil:
        for k in range(betas.shape[0]):
            beta = betas[k]
            for r in range(per_sweep):
                g = picks[step]
                size = sizes[g]
                if size > 1:
                    cur = cols[g]
                    new = (cur + 1 + alts[step]) % size
                    a = offsets[g] + cur
                    b = offsets[g] + new
                    delta = flip_delta(a, x, ones, coef, mono_ptr, var_ptr, var_monos)
                    apply_flip(a, x, ones, var_ptr, var_monos)
                    delta += flip_delta(b, x, ones, coef, mono_ptr, var_ptr, var_monos)
                    apply_flip(b, x, ones, var_ptr, var_monos)
                    if accept(delta, beta, uniforms[step], greedy):
                        cols[g] = new
                    else:
                        apply_flip(b, x, ones, var_ptr, var_monos)
                        apply_flip(a, x, ones, var_ptr, var_monos)
                step += 1
