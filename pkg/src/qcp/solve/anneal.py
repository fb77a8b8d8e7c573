"""Simulated annealing over bitvectors or one-hot rows."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from .. import _kernels
from ..reduce import ProblemInstance
from .samples import SampleSet

SCHEDULES = ("geometric", "linear")


@dataclass(frozen=True)
class AnnealConfig:
    num_reads: int = 500
    num_sweeps: int = 1000
    beta_start: float = 0.5
    beta_end: float = 10.0
    schedule: str = "geometric"
    seed: int = 0
    proposals_per_sweep: int | None = None  # default: n flips, or one move per group
    initial_state: tuple[int, ...] | None = None
    greedy: bool = False
    annealing_time: float = 60.0  # quantum-anneal emulation only

    def __post_init__(self):
        if self.num_reads < 1:
            raise ValueError("num_reads must be >= 1")
        if self.num_sweeps < 1:
            raise ValueError("num_sweeps must be >= 1")
        if self.beta_start <= 0 or self.beta_end <= 0:
            raise ValueError("inverse temperatures must be positive")
        if not self.greedy and not self.beta_start < self.beta_end:
            raise ValueError("beta_start must be below beta_end")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}")
        if self.proposals_per_sweep is not None and self.proposals_per_sweep < 1:
            raise ValueError("proposals_per_sweep must be >= 1")
        if self.annealing_time <= 0:
            raise ValueError("annealing_time must be positive")


def beta_schedule(cfg: AnnealConfig) -> np.ndarray:
    """Inverse temperature for sweeps k = 1..num_sweeps; the last one equals beta_end."""
    k = np.arange(1, cfg.num_sweeps + 1, dtype=np.float64) / cfg.num_sweeps
    if cfg.schedule == "geometric":
        return cfg.beta_start * (cfg.beta_end / cfg.beta_start) ** k
    return cfg.beta_start + (cfg.beta_end - cfg.beta_start) * k


def read_rng(seed: int, read: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) % 2**64, read])


def simulated_anneal(inst: ProblemInstance, cfg: AnnealConfig = AnnealConfig(), kernels=None) -> SampleSet:
    """Metropolis annealing, one independent random stream per read.

    Unconstrained: each proposal flips one uniformly chosen bit. Constrained:
    each proposal moves one uniformly chosen row's 1 to another column.
    """
    k = kernels or _kernels
    p = inst.p
    n = p.num_vars
    start = time.perf_counter()
    meta = {"solver": "sa", "config": asdict(cfg), "backend": getattr(k, "BACKEND", k.__name__)}
    if n == 0:
        out = SampleSet.from_assignments(p, np.zeros((cfg.num_reads, 0)), metadata=meta)
        out.metadata["wall_time"] = time.perf_counter() - start
        return out
    coef, mono_ptr, mono_vars, var_ptr, var_monos = p.csr_arrays()
    betas = beta_schedule(cfg)
    greedy = bool(cfg.greedy)
    results = np.zeros((cfg.num_reads, n), dtype=np.int8)

    if inst.constrained:
        groups = inst.groups
        sizes = np.array([len(g) for g in groups], dtype=np.int64)
        offsets = np.array([g[0] for g in groups], dtype=np.int64)
        if any(list(g) != list(range(g[0], g[0] + len(g))) for g in groups):
            raise ValueError("one-hot groups must be contiguous ranges")
        per = cfg.proposals_per_sweep or len(groups)
        steps = per * cfg.num_sweeps
        for r in range(cfg.num_reads):
            rng = read_rng(cfg.seed, r)
            if cfg.initial_state is not None:
                cols = np.array([_column_of(cfg.initial_state, g) for g in groups], dtype=np.int64)
            else:
                cols = rng.integers(0, sizes).astype(np.int64)
            picks = rng.integers(0, len(groups), steps).astype(np.int64)
            alts = rng.integers(0, np.maximum(sizes[picks] - 1, 1)).astype(np.int64)
            uniforms = rng.random(steps)
            k.anneal_onehot(cols, offsets, sizes, betas, picks, alts, uniforms, per,
                            coef, mono_ptr, mono_vars, var_ptr, var_monos, greedy)
            for g, c in zip(groups, cols.tolist()):
                results[r, g[c]] = 1
    else:
        per = cfg.proposals_per_sweep or n
        steps = per * cfg.num_sweeps
        for r in range(cfg.num_reads):
            rng = read_rng(cfg.seed, r)
            if cfg.initial_state is not None:
                x = np.array(cfg.initial_state, dtype=np.int8)
                if x.shape != (n,):
                    raise ValueError(f"initial_state must have length {n}")
            else:
                x = rng.integers(0, 2, n).astype(np.int8)
            picks = rng.integers(0, n, steps).astype(np.int64)
            uniforms = rng.random(steps)
            k.anneal_flip(x, betas, picks, uniforms, per, coef, mono_ptr, mono_vars,
                          var_ptr, var_monos, greedy)
            results[r] = x
    out = SampleSet.from_assignments(p, results, metadata=meta)
    out.metadata["wall_time"] = time.perf_counter() - start
    return out


def _column_of(x, group) -> int:
    ones = [i for i, v in enumerate(group) if x[v]]
    if len(ones) != 1:
        raise ValueError("initial_state is not one-hot on every group")
    return ones[0]
