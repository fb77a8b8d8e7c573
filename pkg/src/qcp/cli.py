"""Command-line interface: ``qcp <subcommand> ...``.

Exit codes: 0 contained (or success), 1 not contained, 2 undetermined, 3 error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import bench
from .cq import Mapping, QueryFormatError, dump_query_pair, is_homomorphism, parse_query_pair
from .reduce import build_instance
from .solve import AnnealConfig, QaoaConfig
from .verdict import EarlyReject
from .workflow import (
    CAP_ERRORS,
    RunConfig,
    SOLVERS,
    bench_rows,
    classify,
    decide,
    env_seed,
    load_corpus,
    route,
    run_solver,
)

EXIT_OK, EXIT_NOT_CONTAINED, EXIT_UNDETERMINED, EXIT_ERROR = 0, 1, 2, 3


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=d(None), help="master seed (falls back to $QCP_SEED, then 0)")
    parser.add_argument("--variant", choices=("generic", "simplified"), default=d("simplified"))
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--constrained", dest="constrained", action="store_true", default=d(None),
                       help="one-hot search space (default for qaoa)")
    group.add_argument("--unconstrained", dest="constrained", action="store_false", default=d(None))
    parser.add_argument("--solver", choices=SOLVERS, default=d("sa"))
    parser.add_argument("--penalty", choices=("product", "per-relation"), default=d("product"))
    parser.add_argument("--no-fallback", dest="fallback", action="store_false", default=d(True),
                        help="error out instead of using QAOA for degree > 2")
    parser.add_argument("--simplify-fixpoint", dest="fixpoint", action="store_true", default=d(False))
    parser.add_argument("--out", default=d(None), help="output file (default stdout)")
    parser.add_argument("--reads", type=int, default=d(500))
    parser.add_argument("--sweeps", type=int, default=d(1000))
    parser.add_argument("--beta-range", type=float, nargs=2, default=d((0.5, 10.0)), metavar=("START", "END"))
    parser.add_argument("--schedule", choices=("geometric", "linear"), default=d("geometric"))
    parser.add_argument("--proposals-per-sweep", type=int, default=d(None))
    parser.add_argument("--annealing-time", type=float, default=d(60.0))
    parser.add_argument("--layers", type=int, default=d(2))
    parser.add_argument("--iterations", type=int, default=d(30))
    parser.add_argument("--shots", type=int, default=d(500))
    parser.add_argument("--sampled-expectation", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcp", description="Decide conjunctive-query containment by binary polynomial minimization.",
        epilog="exit codes: 0 contained or success, 1 not contained, 2 undetermined, 3 error")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, suppress=True)
        return p

    p = add("decide", "decide q1 contained in q2 for a pair file")
    p.add_argument("pair")
    p = add("reduce", "write the polynomial instance for a pair file")
    p.add_argument("pair")
    p = add("solve", "reduce and solve, writing the sample set as CSV (+ .json sidecar)")
    p.add_argument("pair")
    p = add("generate", "write family pair files")
    p.add_argument("family", choices=bench.FAMILIES)
    p.add_argument("i", type=int)
    p.add_argument("--to", type=int, default=None, help="generate i..TO")
    p.add_argument("--corpus", default=None, help="directory for one labelled file per pair")
    p.add_argument("--reversed", action="store_true", help="also emit swapped (negative) pairs")
    p = add("landscape", "enumerate the unconstrained energy landscape")
    p.add_argument("target", help="family name or pair file")
    p.add_argument("i", type=int, nargs="?")
    p = add("bench", "solution probability per family size")
    p.add_argument("family", choices=bench.FAMILIES)
    p.add_argument("first", type=int)
    p.add_argument("last", type=int)
    p = add("classify", "TP/FP/FN/TN table over a labelled corpus directory")
    p.add_argument("corpus")
    p = add("verify", "check a witness mapping file against a pair file")
    p.add_argument("pair")
    p.add_argument("witness")
    return parser


def run_config(args) -> RunConfig:
    seed = args.seed if args.seed is not None else env_seed()
    anneal = AnnealConfig(num_reads=args.reads, num_sweeps=args.sweeps, beta_start=args.beta_range[0],
                          beta_end=args.beta_range[1], schedule=args.schedule,
                          proposals_per_sweep=args.proposals_per_sweep,
                          annealing_time=args.annealing_time, seed=seed)
    qaoa = QaoaConfig(layers=args.layers, iterations=args.iterations, shots=args.shots,
                      expectation="sampled" if args.sampled_expectation else "exact", seed=seed)
    return RunConfig(variant=args.variant, constrained=args.constrained, solver=args.solver,
                     penalty=args.penalty, fixpoint=args.fixpoint, fallback=args.fallback,
                     seed=seed, anneal=anneal, qaoa=qaoa)


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _read_pair(path):
    return parse_query_pair(Path(path).read_bytes())


def cmd_decide(args, cfg: RunConfig) -> int:
    outcome = decide(*_read_pair(args.pair), cfg)
    _emit(json.dumps(outcome.to_json(), indent=2) + "\n", args.out)
    return outcome.verdict.exit_code


def cmd_reduce(args, cfg: RunConfig) -> int:
    q1, q2 = _read_pair(args.pair)
    try:
        inst = build_instance(q1, q2, cfg.variant, constrained=cfg.constrained_for(cfg.solver),
                              penalty=cfg.penalty, fixpoint=cfg.fixpoint)
    except EarlyReject as exc:
        _emit(json.dumps({"early_reject": exc.to_json()}, indent=2) + "\n", args.out)
        return EXIT_NOT_CONTAINED
    _emit(inst.dumps() + "\n", args.out)
    return EXIT_OK


def cmd_solve(args, cfg: RunConfig) -> int:
    q1, q2 = _read_pair(args.pair)
    try:
        inst = build_instance(q1, q2, cfg.variant, penalty=cfg.penalty, fixpoint=cfg.fixpoint)
    except EarlyReject as exc:
        print(json.dumps({"early_reject": exc.to_json()}), file=sys.stderr)
        return EXIT_NOT_CONTAINED
    solver, _ = route(inst, cfg)
    if cfg.constrained_for(solver):
        from .reduce import apply_constraints
        inst = apply_constraints(inst)
    samples = run_solver(solver, inst, cfg)
    samples.metadata.update({"seed": cfg.seed, "d": inst.d, "variant": inst.tag})
    if args.out:
        samples.write(args.out, str(args.out) + ".json")
    else:
        sys.stdout.write(samples.to_csv())
    return EXIT_OK


def cmd_generate(args, cfg: RunConfig) -> int:
    last = args.to if args.to is not None else args.i
    if args.corpus:
        target = Path(args.corpus)
        target.mkdir(parents=True, exist_ok=True)
        for i in range(args.i, last + 1):
            fam = bench.generate(args.family, i)
            meta = {"family": fam.family, "i": i, "ground_truth": list(fam.ground_truth)}
            (target / f"{fam.family}-{i:03d}.json").write_text(
                dump_query_pair(fam.q1, fam.q2, label="positive", **meta) + "\n", encoding="utf-8")
            if args.reversed:
                (target / f"{fam.family}-{i:03d}-reversed.json").write_text(
                    dump_query_pair(fam.q2, fam.q1, label="negative", family=fam.family, i=i) + "\n",
                    encoding="utf-8")
        return EXIT_OK
    if last != args.i:
        raise SystemExit("--to needs --corpus")
    fam = bench.generate(args.family, args.i)
    text = dump_query_pair(fam.q1, fam.q2, label="positive", family=fam.family, i=fam.i,
                           ground_truth=list(fam.ground_truth))
    _emit(text + "\n", args.out)
    return EXIT_OK


def cmd_landscape(args, cfg: RunConfig) -> int:
    meta = {}
    if args.target in bench.FAMILIES:
        if args.i is None:
            raise SystemExit("landscape FAMILY needs i")
        fam = bench.generate(args.target, args.i)
        q1, q2 = fam.pair
        closed = bench.closed_form_fractions(fam.family, fam.i)
        meta = {"family": fam.family, "i": fam.i,
                "closed_form": {k: str(v) for k, v in closed.items()}}
        if fam.family == "cycle-chain":
            meta["note"] = ("chain neg fraction uses denominator 2*3^(i+1); "
                            "the 2^(i+2) form disagrees with exhaustive counts")
    else:
        q1, q2 = _read_pair(args.target)
    try:
        inst = build_instance(q1, q2, cfg.variant, penalty=cfg.penalty, fixpoint=cfg.fixpoint)
    except EarlyReject as exc:
        _emit(json.dumps({"early_reject": exc.to_json()}, indent=2) + "\n", args.out)
        return EXIT_NOT_CONTAINED
    report = bench.enumerate_landscape(inst)
    report.metadata = meta
    _emit(json.dumps(report.to_json(), indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_bench(args, cfg: RunConfig) -> int:
    rows = bench_rows(args.family, range(args.first, args.last + 1), cfg)
    buf = io.StringIO()
    fields = list(rows[0]) if rows else ["i", "num_vars", "solution_probability", "wall_time"]
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_classify(args, cfg: RunConfig) -> int:
    table = classify(load_corpus(args.corpus), cfg)
    out = table.as_dict()
    out["rows"] = [{"file": n, "label": "positive" if pos else "negative", "verdict": v, "note": note}
                   for n, pos, v, note in table.rows]
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    if table.fp:
        # every Contained verdict carries a checked witness, so this is a mislabelled entry
        print(f"error: {table.fp} entries labelled negative have verified witnesses", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    q1, q2 = _read_pair(args.pair)
    data = json.loads(Path(args.witness).read_text(encoding="utf-8"))
    if "witness" in data:  # accept decide output directly
        data = data["witness"]
    h = Mapping.from_json(data)
    try:
        ok = is_homomorphism(h, q2, q1)
    except ValueError as exc:
        print(f"invalid witness: {exc}", file=sys.stderr)
        return EXIT_NOT_CONTAINED
    print("valid" if ok else "invalid")
    return EXIT_OK if ok else EXIT_NOT_CONTAINED


COMMANDS = {
    "decide": cmd_decide, "reduce": cmd_reduce, "solve": cmd_solve, "generate": cmd_generate,
    "landscape": cmd_landscape, "bench": cmd_bench, "classify": cmd_classify, "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = run_config(args)
        return COMMANDS[args.command](args, cfg)
    except (OSError, QueryFormatError, ValueError, *CAP_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
