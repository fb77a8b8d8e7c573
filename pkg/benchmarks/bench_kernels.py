"""Compare the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 3]

Prints one row per workload with the best wall time of each backend and the
speed-up. Both backends must produce identical output; a mismatch aborts.
"""

import argparse
import time

import numpy as np

from qcp import _kernels
from qcp.bench import gen_chain_star, gen_cycle_chain
from qcp.reduce import apply_constraints, build_generic
from qcp.solve import AnnealConfig, simulated_anneal


def best_of(repeat, fn):
    times, result = [], None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - start)
    return min(times), result


def energy_table(kernels, p):
    coef, mono_ptr, mono_vars, _, _ = p.csr_arrays()
    return kernels.energies_all(p.num_vars, coef, mono_ptr, mono_vars, p.constant_term)


def workloads():
    chain = build_generic(*gen_cycle_chain(8).pair)
    star = build_generic(*gen_chain_star(5).pair)
    cfg = AnnealConfig(num_reads=50, num_sweeps=1000, seed=1)
    yield "energies_all chain i=8 (18 vars)", lambda k: energy_table(k, chain.p)
    yield "strict minima chain i=8", lambda k: k.strict_local_minima(energy_table(k, chain.p), chain.num_vars)
    yield "anneal chain i=8, 50 reads", lambda k: simulated_anneal(chain, cfg, kernels=k).to_csv()
    yield "anneal star i=5, 50 reads", lambda k: simulated_anneal(star, cfg, kernels=k).to_csv()
    yield "anneal one-hot chain i=8", lambda k: simulated_anneal(apply_constraints(chain), cfg, kernels=k).to_csv()


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    try:
        compiled = _kernels.backend("cython")
    except ImportError:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    python = _kernels.backend("python")
    print(f"{'workload':36s} {'cython s':>10s} {'python s':>10s} {'speed-up':>9s}")
    for name, job in workloads():
        tc, rc = best_of(args.repeat, lambda: job(compiled))
        tp, rp = best_of(args.repeat, lambda: job(python))
        same = np.array_equal(rc, rp) if isinstance(rc, np.ndarray) else rc == rp
        if not same:
            raise SystemExit(f"backends disagree on {name}")
        print(f"{name:36s} {tc:10.4f} {tp:10.4f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
