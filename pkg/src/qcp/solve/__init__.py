from .anneal import AnnealConfig, beta_schedule, simulated_anneal
from .exact import DEFAULT_CAP, SearchSpaceTooLarge, all_energies, brute_force_min, grid_energies
from .qaoa import QaoaConfig, SimulatorCapExceeded, qaoa_statevector
from .quantum_anneal import QuantumAnnealIncompatible, quantum_anneal_emulate
from .samples import Sample, SampleSet, at_least_one_probability, solution_probability

__all__ = [
    "AnnealConfig", "QaoaConfig", "Sample", "SampleSet", "DEFAULT_CAP",
    "SearchSpaceTooLarge", "SimulatorCapExceeded", "QuantumAnnealIncompatible",
    "all_energies", "at_least_one_probability", "beta_schedule", "brute_force_min",
    "grid_energies", "qaoa_statevector", "quantum_anneal_emulate", "simulated_anneal",
    "solution_probability",
]
