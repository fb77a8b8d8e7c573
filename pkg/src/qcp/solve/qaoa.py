"""QAOA statevector simulation with plain and one-hot (Grover-mixer) variants."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize

from ..reduce import ProblemInstance
from .exact import all_energies, grid_energies, onehot_bits
from .samples import SampleSet, indices_to_bits

DEFAULT_QUBIT_CAP = 24


@dataclass(frozen=True)
class QaoaConfig:
    layers: int = 2
    iterations: int = 30
    shots: int = 500
    constrained: bool | None = None  # None: follow the instance
    seed: int = 0
    expectation: str = "exact"  # exact | sampled
    phase: str = "diagonal"  # diagonal | monomial
    representation: str = "subspace"  # subspace | full (constrained only)
    cap: int = DEFAULT_QUBIT_CAP

    def __post_init__(self):
        if self.layers < 0:
            raise ValueError("layers must be >= 0")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.expectation not in ("exact", "sampled"):
            raise ValueError("expectation must be 'exact' or 'sampled'")
        if self.phase not in ("diagonal", "monomial"):
            raise ValueError("phase must be 'diagonal' or 'monomial'")
        if self.representation not in ("subspace", "full"):
            raise ValueError("representation must be 'subspace' or 'full'")


class SimulatorCapExceeded(RuntimeError):
    pass


# --------------------------------------------------------------------------- operators


def monomial_phase(p, gamma: float, n: int) -> np.ndarray:
    """exp(-i*gamma*p(x)) built one monomial at a time (one controlled phase each)."""
    factor = np.full(1 << n, np.exp(-1j * gamma * p.constant_term), dtype=np.complex128)
    idx = np.arange(1 << n, dtype=np.int64)
    for m in p.monomials:
        if not m.variables:
            continue
        mask = 0
        for v in m.variables:
            mask |= 1 << (n - 1 - v)
        hit = (idx & mask) == mask
        factor[hit] *= np.exp(-1j * gamma * m.coefficient)
    return factor


def apply_x_mixer(state: np.ndarray, beta: float, n: int) -> np.ndarray:
    """Per-qubit exp(-i*beta*(1 - X)/2)."""
    c = np.cos(beta / 2)
    s = 1j * np.sin(beta / 2)
    psi = np.array(state, dtype=np.complex128).reshape(-1)
    for q in range(n):
        view = psi.reshape(1 << q, 2, 1 << (n - 1 - q))
        a = view[:, 0, :].copy()
        b = view[:, 1, :]
        view[:, 0, :] = c * a + s * b
        view[:, 1, :] = s * a + c * b
    return np.exp(-0.5j * beta * n) * psi


def apply_grover_mixers(state: np.ndarray, beta: float) -> np.ndarray:
    """I + (e^{-i beta} - 1)|W><W| on every axis of a one-hot subspace tensor."""
    k = np.exp(-1j * beta) - 1
    out = state
    for axis in range(state.ndim):
        out = out + k * out.mean(axis=axis, keepdims=True)
    return out


def _w_vector(m: int) -> np.ndarray:
    w = np.zeros(1 << m, dtype=np.complex128)
    for j in range(m):
        w[1 << (m - 1 - j)] = 1 / np.sqrt(m)
    return w


def apply_grover_mixers_full(state: np.ndarray, beta: float, sizes) -> np.ndarray:
    """Same mixer on the full 2^n register, groups being contiguous qubit blocks."""
    k = np.exp(-1j * beta) - 1
    psi = state.reshape(tuple(1 << m for m in sizes))
    for axis, m in enumerate(sizes):
        w = _w_vector(m)
        overlap = np.tensordot(w.conj(), psi, axes=([0], [axis]))
        psi = psi + k * np.moveaxis(np.multiply.outer(w, overlap), 0, axis)
    return psi.reshape(-1)


def feasible_mask_full(sizes) -> np.ndarray:
    masks = []
    for m in sizes:
        onehot = np.zeros(1 << m, dtype=bool)
        for j in range(m):
            onehot[1 << (m - 1 - j)] = True
        masks.append(onehot)
    out = np.ones(1, dtype=bool)
    for mk in masks:
        out = np.logical_and.outer(out, mk).reshape(-1)
    return out


# --------------------------------------------------------------------------- simulation


class _Circuit:
    def __init__(self, inst: ProblemInstance, cfg: QaoaConfig):
        self.inst = inst
        self.cfg = cfg
        n = inst.num_vars
        constrained = inst.constrained if cfg.constrained is None else cfg.constrained
        if constrained and not inst.constrained:
            raise ValueError("constrained QAOA needs a constrained instance (apply_constraints)")
        self.constrained = constrained
        self.n = n
        self.max_infeasible = 0.0
        self.max_norm_error = 0.0
        if constrained:
            self.sizes = [len(g) for g in inst.groups]
            dim = int(np.prod(self.sizes, dtype=object)) if self.sizes else 1
            full = cfg.representation == "full"
            if (full and n > cfg.cap) or dim > 2**cfg.cap:
                raise SimulatorCapExceeded(f"state dimension exceeds the cap of 2^{cfg.cap}")
            self.full = full
            if full:
                self.energies = all_energies(inst.p, cap=2**cfg.cap).astype(np.float64)
                self.feasible = feasible_mask_full(self.sizes)
            else:
                self.energies = grid_energies(inst.p, inst.groups, cap=2**cfg.cap).astype(np.float64)
        else:
            if n > cfg.cap:
                raise SimulatorCapExceeded(f"{n} qubits exceed the cap of {cfg.cap}")
            self.full = True
            self.energies = all_energies(inst.p, cap=2**cfg.cap).astype(np.float64)

    def initial(self) -> np.ndarray:
        if not self.constrained:
            dim = 1 << self.n
            return np.full(dim, 1 / np.sqrt(dim), dtype=np.complex128)
        if self.full:
            psi = np.ones(1, dtype=np.complex128)
            for m in self.sizes:
                psi = np.multiply.outer(psi, _w_vector(m)).reshape(-1)
            return psi
        dim = self.energies.size
        return np.full(self.energies.shape, 1 / np.sqrt(dim), dtype=np.complex128)

    def _track(self, psi):
        self.max_norm_error = max(self.max_norm_error, abs(np.linalg.norm(psi) - 1.0))
        if self.constrained and self.full:
            leak = float(np.sum(np.abs(psi[~self.feasible]) ** 2))
            self.max_infeasible = max(self.max_infeasible, leak)

    def phase(self, psi, gamma):
        if self.cfg.phase == "monomial" and self.full:
            return psi * monomial_phase(self.inst.p, gamma, self.n)
        return psi * np.exp(-1j * gamma * self.energies).reshape(psi.shape)

    def mixer(self, psi, beta):
        if not self.constrained:
            return apply_x_mixer(psi, beta, self.n)
        if self.full:
            return apply_grover_mixers_full(psi, beta, self.sizes)
        return apply_grover_mixers(psi, beta)

    def state(self, params) -> np.ndarray:
        layers = self.cfg.layers
        gammas, betas = params[:layers], params[layers:]
        psi = self.initial()
        self._track(psi)
        for g, b in zip(gammas, betas):
            psi = self.phase(psi, g)
            self._track(psi)
            psi = self.mixer(psi, b)
            self._track(psi)
        return psi

    def probabilities(self, psi) -> np.ndarray:
        probs = np.abs(psi.reshape(-1)) ** 2
        if self.constrained and self.full:
            probs = np.where(self.feasible, probs, 0.0)
        return probs / probs.sum()

    def bitvectors(self, indices) -> np.ndarray:
        if self.constrained and not self.full:
            if not self.sizes:
                return np.zeros((len(indices), 0), dtype=np.int8)
            cols = np.array(np.unravel_index(indices, self.energies.shape)).T
            return np.array([onehot_bits(c, self.inst.groups, self.n) for c in cols.tolist()],
                            dtype=np.int8).reshape(-1, self.n)
        return indices_to_bits(indices, self.n)


def qaoa_statevector(inst: ProblemInstance, cfg: QaoaConfig = QaoaConfig()):
    """Optimise QAOA angles and sample the final state.

    Returns ``(samples, betas, gammas)``.
    """
    start = time.perf_counter()
    circ = _Circuit(inst, cfg)
    rng = np.random.default_rng([int(cfg.seed) % 2**64, 0x9A0A])
    flat_energy = circ.energies.reshape(-1)

    def expectation(params) -> float:
        probs = circ.probabilities(circ.state(params))
        if cfg.expectation == "exact":
            return float(probs @ flat_energy)
        counts = rng.multinomial(cfg.shots, probs)
        return float(counts @ flat_energy) / cfg.shots

    dim = 2 * cfg.layers
    status = "no parameters"
    evaluations = 0
    if dim:
        simplex = rng.uniform(0.0, 2 * np.pi, size=(dim + 1, dim))
        best = {"value": np.inf, "params": simplex[0]}
        history = []

        def objective(params):
            value = expectation(params)
            history.append(value)
            if value < best["value"]:
                best["value"], best["params"] = value, np.array(params)
            return value

        if cfg.iterations > 0:
            minimize(objective, simplex[0], method="Nelder-Mead",
                     options={"maxfev": cfg.iterations, "initial_simplex": simplex})
        params = best["params"]
        evaluations = len(history)
        status = "improved" if history and best["value"] < history[0] else "no improvement"
    else:
        params = np.zeros(0)

    psi = circ.state(params)
    probs = circ.probabilities(psi)
    counts = rng.multinomial(cfg.shots, probs)
    hit = np.flatnonzero(counts)
    xs = circ.bitvectors(hit)
    gammas, betas = params[: cfg.layers], params[cfg.layers:]
    d_mask = flat_energy == inst.d
    meta = {
        "solver": "qaoa",
        "config": asdict(cfg),
        "constrained": circ.constrained,
        "optimizer": "Nelder-Mead",
        "optimizer_status": status,
        "evaluations": evaluations,
        "expectation": float(probs @ flat_energy),
        "exact_solution_probability": float(probs[d_mask].sum()),
        "max_infeasible_mass": circ.max_infeasible,
        "max_norm_error": circ.max_norm_error,
        "gammas": gammas.tolist(),
        "betas": betas.tolist(),
    }
    samples = SampleSet.from_assignments(inst.p, xs, counts[hit], metadata=meta)
    samples.metadata["wall_time"] = time.perf_counter() - start
    return samples, betas, gammas
