"""Trotterised statevector emulation of transverse-field quantum annealing."""

from __future__ import annotations

import time
from dataclasses import asdict

import numpy as np

from ..poly import polynomial_to_ising
from ..reduce import ProblemInstance
from .anneal import AnnealConfig, read_rng
from .qaoa import apply_x_mixer
from .samples import SampleSet, indices_to_bits

DEFAULT_QUBIT_CAP = 16


class QuantumAnnealIncompatible(ValueError):
    pass


def ising_diagonal(model) -> np.ndarray:
    """sum h_i s_i + sum J_ij s_i s_j for every basis state (s = 1 - 2x)."""
    n = model.num_vars
    h, J = model.fields()
    idx = np.arange(1 << n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    spins = 1 - 2 * ((idx[:, None] >> shifts[None, :]) & 1)
    return spins @ h + np.einsum("bi,ij,bj->b", spins, J, spins)


def quantum_anneal_emulate(inst: ProblemInstance, cfg: AnnealConfig = AnnealConfig(),
                           cap: int = DEFAULT_QUBIT_CAP) -> SampleSet:
    """Evolve |+>^n under (1-s) H_I + s H_p with s = t/t_f, one product-formula step per sweep."""
    if inst.constrained:
        raise QuantumAnnealIncompatible("quantum-anneal emulation works on unconstrained instances only")
    if inst.p.degree > 2:
        raise QuantumAnnealIncompatible(f"degree {inst.p.degree} polynomial has no Ising form")
    n = inst.num_vars
    if n > cap:
        raise QuantumAnnealIncompatible(f"{n} qubits exceed the emulator cap of {cap}")
    start = time.perf_counter()
    model = polynomial_to_ising(inst.p)
    diag = ising_diagonal(model)
    dt = cfg.annealing_time / cfg.num_sweeps
    psi = np.full(1 << n, 1 / np.sqrt(1 << n), dtype=np.complex128)
    for k in range(cfg.num_sweeps):
        s = k / cfg.num_sweeps
        psi = psi * np.exp(-1j * dt * s * diag)
        psi = apply_x_mixer(psi, dt * (1 - s), n)
    probs = np.abs(psi) ** 2
    probs /= probs.sum()
    rng = read_rng(cfg.seed, 0)
    counts = rng.multinomial(cfg.num_reads, probs)
    hit = np.flatnonzero(counts)
    meta = {"solver": "qa-emulate", "config": asdict(cfg), "envelopes": "A(s)=1-s, B(s)=s"}
    out = SampleSet.from_assignments(inst.p, indices_to_bits(hit, n), counts[hit], metadata=meta)
    out.metadata["wall_time"] = time.perf_counter() - start
    return out
