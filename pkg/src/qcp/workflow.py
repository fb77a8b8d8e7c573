"""Preprocess, solve, certify."""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .cq import OracleOverflow, Query, is_homomorphism, parse_query_pair
from .reduce import NotAFunctionError, ProblemInstance, apply_constraints, build_instance, detect_trivial, extract_witness
from .solve import (
    AnnealConfig,
    QaoaConfig,
    SampleSet,
    SearchSpaceTooLarge,
    SimulatorCapExceeded,
    QuantumAnnealIncompatible,
    brute_force_min,
    qaoa_statevector,
    quantum_anneal_emulate,
    simulated_anneal,
    solution_probability,
)
from .verdict import Contained, EarlyReject, NotContained, Undetermined

SOLVERS = ("sa", "qaoa", "brute", "qa-emulate")
ANNEALERS = ("sa", "qa-emulate")


class SolverIncompatible(RuntimeError):
    """The preferred solver cannot handle the instance and fallback is disabled."""


@dataclass(frozen=True)
class RunConfig:
    variant: str = "simplified"
    constrained: bool | None = None  # None: on for QAOA, off otherwise
    solver: str = "sa"
    penalty: str = "product"
    fixpoint: bool = False
    fallback: bool = True
    seed: int = 0
    anneal: AnnealConfig = field(default_factory=AnnealConfig)
    qaoa: QaoaConfig = field(default_factory=QaoaConfig)
    brute_cap: int = 2**24

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}; expected one of {SOLVERS}")
        if self.variant not in ("generic", "simplified"):
            raise ValueError(f"unknown variant {self.variant!r}")

    def constrained_for(self, solver: str) -> bool:
        if solver == "qa-emulate":
            return False
        if self.constrained is None:
            return solver == "qaoa"
        return self.constrained

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, seed=seed)


@dataclass
class Outcome:
    verdict: object
    instance: ProblemInstance | None = None
    samples: SampleSet | None = None
    solver: str | None = None
    fell_back: bool = False
    wall_time: float = 0.0

    def to_json(self) -> dict:
        out = self.verdict.to_json()
        out["solver_used"] = self.solver
        out["fell_back"] = self.fell_back
        if self.instance is not None:
            out["instance"] = {"variant": self.instance.tag, "num_vars": self.instance.num_vars,
                               "degree": self.instance.p.degree, "d": self.instance.d}
        if self.samples is not None and self.instance is not None:
            out["solution_probability"] = float(solution_probability(self.samples, self.instance.d))
        return out


def reduce_pair(q1: Query, q2: Query, cfg: RunConfig, constrained: bool) -> ProblemInstance:
    return build_instance(q1, q2, cfg.variant, constrained=constrained, penalty=cfg.penalty,
                          fixpoint=cfg.fixpoint)


def route(inst: ProblemInstance, cfg: RunConfig) -> tuple[str, bool]:
    """Pick the solver for an instance; returns (solver, fell_back)."""
    if cfg.solver in ANNEALERS and inst.p.degree > 2:
        if not cfg.fallback:
            raise SolverIncompatible(
                f"degree {inst.p.degree} polynomial cannot be annealed and fallback is disabled")
        return "qaoa", True
    return cfg.solver, False


def run_solver(solver: str, inst: ProblemInstance, cfg: RunConfig) -> SampleSet:
    if solver == "sa":
        return simulated_anneal(inst, replace(cfg.anneal, seed=cfg.seed))
    if solver == "qa-emulate":
        return quantum_anneal_emulate(inst, replace(cfg.anneal, seed=cfg.seed))
    if solver == "qaoa":
        return qaoa_statevector(inst, replace(cfg.qaoa, seed=cfg.seed, constrained=inst.constrained))[0]
    if solver == "brute":
        best, argmins = brute_force_min(inst, cfg.brute_cap)
        meta = {"solver": "brute", "minimum": best}
        return SampleSet.from_assignments(inst.p, argmins, metadata=meta)
    raise ValueError(solver)


def certify(samples: SampleSet, inst: ProblemInstance, q1: Query, q2: Query):
    """First sample at the target energy that decodes to a verified homomorphism."""
    for s in samples.at_energy(inst.d):
        try:
            h = extract_witness(s.assignment, inst.layout)
        except NotAFunctionError:
            continue
        if is_homomorphism(h, q2, q1):
            return h
    return None


def decide(q1: Query, q2: Query, cfg: RunConfig = RunConfig()) -> Outcome:
    start = time.perf_counter()
    solver = cfg.solver
    try:
        inst = reduce_pair(q1, q2, cfg, False)
    except EarlyReject as exc:
        return Outcome(NotContained("early-reject", exc, str(exc)), wall_time=time.perf_counter() - start)
    fell_back = False
    if solver in ANNEALERS and inst.p.degree > 2:
        solver, fell_back = route(inst, cfg)
    if cfg.constrained_for(solver):
        inst = apply_constraints(inst)
    trivial = detect_trivial(inst, q1, q2)
    if trivial is not None:
        return Outcome(trivial, inst, None, None, False, time.perf_counter() - start)
    samples = run_solver(solver, inst, cfg)
    h = certify(samples, inst, q1, q2)
    source = "brute-force" if solver == "brute" else "solver"
    if h is not None:
        verdict = Contained(h, source, q1, q2, solver=solver)
    elif solver == "brute":
        verdict = NotContained("exhaustive", detail=f"minimum {samples.lowest.energy} > d = {inst.d}")
    else:
        best = samples.lowest.energy if samples.lowest else None
        verdict = Undetermined(best, inst.d, solver)
    return Outcome(verdict, inst, samples, solver, fell_back, time.perf_counter() - start)


def decide_file(path, cfg: RunConfig = RunConfig()) -> Outcome:
    q1, q2 = parse_query_pair(Path(path).read_bytes())
    return decide(q1, q2, cfg)


def derive_seed(master: int, row: int) -> int:
    return int(np.random.SeedSequence([int(master) % 2**64, row]).generate_state(1, np.uint64)[0])


# --------------------------------------------------------------------------- corpus classification


CAP_ERRORS = (OracleOverflow, SearchSpaceTooLarge, SimulatorCapExceeded, QuantumAnnealIncompatible,
              SolverIncompatible)


def _label(raw) -> bool:
    if isinstance(raw, bool):
        return raw
    if raw in ("positive", "contained"):
        return True
    if raw in ("negative", "not-contained"):
        return False
    raise ValueError(f"unrecognised label {raw!r}")


def load_corpus(directory) -> list[tuple[str, Query, Query, bool]]:
    entries = []
    for path in sorted(Path(directory).glob("*.json")):
        text = path.read_bytes()
        data = json.loads(text)
        if "label" not in data:
            raise ValueError(f"{path.name}: corpus entry has no label")
        q1, q2 = parse_query_pair(text)
        entries.append((path.name, q1, q2, _label(data["label"])))
    return entries


@dataclass
class ClassificationTable:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0
    bottom: int = 0
    rows: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"TP": self.tp, "FP": self.fp, "FN": self.fn, "TN": self.tn, "bottom": self.bottom}


def classify(entries, cfg: RunConfig = RunConfig()) -> ClassificationTable:
    table = ClassificationTable()
    for row, (name, q1, q2, positive) in enumerate(entries):
        try:
            outcome = decide(q1, q2, cfg.with_seed(derive_seed(cfg.seed, row)))
        except CAP_ERRORS as exc:
            table.bottom += 1
            table.rows.append((name, positive, "bottom", str(exc)))
            continue
        contained = isinstance(outcome.verdict, Contained)
        if contained and positive:
            table.tp += 1
        elif contained:
            table.fp += 1
        elif positive:
            table.fn += 1
        else:
            table.tn += 1
        table.rows.append((name, positive, outcome.verdict.label, ""))
    return table


# --------------------------------------------------------------------------- family benchmark


def bench_rows(family: str, i_values, cfg: RunConfig = RunConfig()) -> list[dict]:
    """Per family size: variables, solution probability (or argmin count for brute), wall time."""
    from .bench import generate

    key = "argmin_count" if cfg.solver == "brute" else "solution_probability"
    rows = []
    for i in i_values:
        fam = generate(family, i)
        row_cfg = cfg.with_seed(derive_seed(cfg.seed, i))
        start = time.perf_counter()
        try:
            inst = reduce_pair(fam.q1, fam.q2, row_cfg, row_cfg.constrained_for(cfg.solver))
            solver, _ = route(inst, row_cfg)
            if solver == "brute":
                best, argmins = brute_force_min(inst, row_cfg.brute_cap)
                value = len(argmins) if best == inst.d else 0
            else:
                samples = run_solver(solver, inst, row_cfg)
                value = float(solution_probability(samples, inst.d))
        except CAP_ERRORS:
            rows.append({"i": i, "num_vars": fam.num_vars, key: "NA",
                         "wall_time": time.perf_counter() - start})
            continue
        rows.append({"i": i, "num_vars": inst.num_vars, key: value,
                     "wall_time": time.perf_counter() - start})
    return rows


def env_seed(default: int = 0) -> int:
    raw = os.environ.get("QCP_SEED")
    return int(raw) if raw not in (None, "") else default
