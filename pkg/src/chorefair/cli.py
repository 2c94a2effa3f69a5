"""Command-line surface: generate, allocate, verify, minimize, experiment.

Machine-readable results go to stdout, diagnostics to stderr.  Exit codes:
0 success / property true, 1 property false (verify), 2 invalid input,
3 inexact result due to budget.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
import time
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .core import (
    Allocation,
    BudgetExceededError,
    Instance,
    InvalidInputError,
    Variant,
    check_def_witness,
    classify_valuations,
    is_ef,
    is_ef1,
    is_fisher_equilibrium,
    is_pareto_optimal,
    is_pef1,
)
from .algorithms import (
    binary_def_po,
    augment_from_equilibrium,
    envy_graph,
    find_pef1_equilibrium,
    round_robin,
    rr_augmentation,
    two_types_def_po,
)
from .solver import (
    DEFAULT_NODE_BUDGET,
    SolveResult,
    is_def_k,
    min_dubious,
    min_over_allocations,
)
from . import generators as gio

CSV_HEADER = "n,m,trial,seed,algorithm,min_k,exact,nodes,runtime_ms"
ALGORITHMS = ("envygraph", "po_optimal", "roundrobin")


@dataclass(frozen=True)
class ExperimentConfig:
    n_range: tuple[int, int]
    m_range: tuple[int, int]
    trials: int = 100
    p_neg: float = 0.7
    seed: int = 0
    algorithms: tuple[str, ...] = ALGORITHMS
    node_budget: int = DEFAULT_NODE_BUDGET

    def __post_init__(self):
        if self.n_range[0] > self.n_range[1] or self.m_range[0] > self.m_range[1]:
            raise InvalidInputError("ranges must be nonempty")
        if self.trials < 1:
            raise InvalidInputError("trials must be >= 1")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise InvalidInputError(f"unknown algorithms: {sorted(unknown)}")
        object.__setattr__(self, "algorithms", tuple(sorted(set(self.algorithms))))

    def cells(self) -> list[tuple[int, int]]:
        out = []
        for n in range(self.n_range[0], self.n_range[1] + 1):
            for m in range(self.m_range[0], self.m_range[1] + 1):
                if m >= n:
                    out.append((n, m))
        return out


@dataclass(frozen=True)
class ExperimentRecord:
    n: int
    m: int
    trial: int
    seed: int
    algorithm: str
    min_k: int
    exact: bool
    nodes: int
    runtime_ms: int

    def csv_row(self) -> str:
        return (
            f"{self.n},{self.m},{self.trial},{self.seed},{self.algorithm},"
            f"{self.min_k},{'true' if self.exact else 'false'},{self.nodes},{self.runtime_ms}"
        )


def load_experiment_config(path: str) -> ExperimentConfig:
    data = gio._load_json(path)
    seed = data.get("seed", 0)
    env_seed = os.environ.get("CHOREFAIR_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError:
            raise InvalidInputError(f"CHOREFAIR_SEED must be an integer, got {env_seed!r}")
    try:
        return ExperimentConfig(
            n_range=tuple(data["n_range"]),
            m_range=tuple(data["m_range"]),
            trials=data.get("trials", 100),
            p_neg=data.get("p_neg", 0.7),
            seed=seed,
            algorithms=tuple(data.get("algorithms", ALGORITHMS)),
            node_budget=data.get("node_budget", DEFAULT_NODE_BUDGET),
        )
    except KeyError as exc:
        raise InvalidInputError(f"{path}: missing config field {exc}")


def _solve_cell(cfg: ExperimentConfig, n: int, m: int, trial: int) -> list[ExperimentRecord]:
    inst = gio.gen_synthetic(
        gio.SyntheticConfig(n, m, cfg.trials, cfg.p_neg, cfg.seed, force_last_common=True),
        trial,
    )
    records = []
    for algo in cfg.algorithms:
        start = time.perf_counter()
        if algo == "roundrobin":
            alloc = round_robin(inst).allocation
            result = min_dubious(inst, alloc, Variant.DEF, cfg.node_budget)
        elif algo == "envygraph":
            alloc = envy_graph(inst)
            result = min_dubious(inst, alloc, Variant.DEF, cfg.node_budget)
        else:
            _, result = min_over_allocations(inst, po_only=True, node_budget=cfg.node_budget)
        runtime = int((time.perf_counter() - start) * 1000)
        records.append(
            ExperimentRecord(
                n, m, trial, cfg.seed, algo, result.min_k, result.exact,
                result.nodes_explored, runtime,
            )
        )
    return records


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> Iterator[ExperimentRecord]:
    """Records in canonical (n, m, trial, algorithm) order, independent of the
    worker count; budget exhaustion is recorded, never raised."""
    tasks = [(n, m, t) for n, m in cfg.cells() for t in range(cfg.trials)]
    if workers <= 1:
        for n, m, t in tasks:
            yield from _solve_cell(cfg, n, m, t)
        return
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_solve_cell, cfg, n, m, t) for n, m, t in tasks]
        for future in futures:
            yield from future.result()


def _write_csv(records: Iterator[ExperimentRecord], out_path: str) -> None:
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for rec in records:
            fh.write(rec.csv_row() + "\n")


# ---------------------------------------------------------------------------
# Subcommand handlers.
# ---------------------------------------------------------------------------


def _emit(payload: dict) -> None:
    json.dump(payload, sys.stdout)
    sys.stdout.write("\n")


def _witness_payload(witness) -> list[dict]:
    return [{"chore": c, "agent": a, "count": k} for c, a, k in witness.copies]


def _cmd_gen(args) -> int:
    if args.kind == "synthetic":
        cfg = gio.SyntheticConfig(
            args.n, args.m, trials=max(1, args.trial + 1), p_neg=args.p_neg,
            seed=args.seed, force_last_common=args.force_last_common,
            enforce_m_ge_n=not args.allow_m_lt_n,
        )
        inst = gio.gen_synthetic(cfg, args.trial)
        gio.write_instance(inst, args.out)
        _emit({"n": inst.n, "m": inst.m, "trial": args.trial, "seed": args.seed})
        return 0
    values = _parse_int_list(args.values) if args.values else []
    sets = _parse_sets(args.sets) if args.sets else []
    if args.kind == "partition":
        inst, answer = gio.gen_from_partition(values, args.k)
        gio.write_instance(inst, args.out)
        _emit({"answer": answer, "k": args.k})
    elif args.kind == "setsplitting":
        universe = args.universe.split(",")
        inst, answer = gio.gen_from_setsplitting(universe, sets, args.k)
        gio.write_instance(inst, args.out)
        _emit({"answer": answer, "k": args.k})
    else:  # rx3c
        universe = args.universe.split(",")
        inst, alloc, answer = gio.gen_from_rx3c(universe, sets)
        gio.write_instance(inst, args.out)
        if args.alloc_out:
            gio.write_allocation(alloc, args.alloc_out)
        _emit({"answer": answer, "k": len(universe) // 3})
    return 0


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise InvalidInputError(f"expected comma-separated integers, got {text!r}")


def _parse_sets(text: str) -> list[frozenset]:
    return [frozenset(part.split(",")) for part in text.split(";") if part]


def _cmd_allocate(args) -> int:
    inst = gio.read_instance(args.instance)
    witness = None
    prices = None
    if args.algo == "rr":
        trace = round_robin(inst)
        alloc = trace.allocation
        witness = rr_augmentation(inst, trace)
    elif args.algo == "envygraph":
        alloc = envy_graph(inst)
    elif args.algo == "binary":
        alloc, witness = binary_def_po(inst)
    elif args.algo == "bivalued":
        eq = find_pef1_equilibrium(inst)
        alloc = eq.allocation
        witness = augment_from_equilibrium(inst, eq, copies_per_agent=1)
        prices = eq.prices
    else:  # twotypes
        alloc, witness, eq = two_types_def_po(inst)
        prices = eq.prices
    if args.out:
        gio.write_allocation(alloc, args.out)
    if args.witness_out and witness is not None:
        gio.write_witness(witness, args.witness_out)
    if args.prices_out and prices is not None:
        gio.write_prices(prices, args.prices_out)
    payload = {"assignment": list(alloc.owner)}
    if witness is not None:
        payload["witness"] = _witness_payload(witness)
    if prices is not None:
        payload["prices"] = [[f.numerator, f.denominator] for f in prices.p]
    _emit(payload)
    return 0


def _cmd_verify(args) -> int:
    inst = gio.read_instance(args.instance)
    alloc = gio.read_allocation(args.allocation, inst)
    if args.check == "ef":
        ok = is_ef(inst, alloc)
    elif args.check == "ef1":
        ok = is_ef1(inst, alloc)
    elif args.check == "po":
        method = args.po_method
        if method == "auto":
            method = "binary_fast" if classify_valuations(inst).binary else "brute"
        ok = is_pareto_optimal(inst, alloc, method)
    elif args.check in ("pef1", "equilibrium"):
        if not args.prices:
            raise InvalidInputError(f"--check {args.check} requires --prices FILE")
        prices = gio.read_prices(args.prices, inst)
        if args.check == "pef1":
            ok = is_pef1(alloc, prices, inst.n)
        else:
            ok = is_fisher_equilibrium(inst, alloc, prices)
    else:  # def
        variant = Variant(args.variant)
        if args.witness:
            witness = gio.read_witness(args.witness, inst)
            ok = (
                witness.size <= args.k
                and check_def_witness(inst, alloc, witness, variant)
            )
        else:
            if args.k is None:
                raise InvalidInputError("--check def requires --k")
            ok = is_def_k(inst, alloc, args.k, variant, args.budget)
    _emit({"check": args.check, "result": ok})
    return 0 if ok else 1


def _solve_payload(result: SolveResult) -> dict:
    payload = {
        "feasible": result.feasible,
        "min_k": result.min_k,
        "exact": result.exact,
        "nodes": result.nodes_explored,
        "runtime_ms": result.runtime_ms,
    }
    if result.witness is not None:
        payload["witness"] = _witness_payload(result.witness)
    return payload


def _cmd_minimize(args) -> int:
    inst = gio.read_instance(args.instance)
    variant = Variant(args.variant)
    if args.over_allocations:
        alloc, result = min_over_allocations(inst, args.po_only, args.budget)
        payload = _solve_payload(result)
        payload["assignment"] = list(alloc.owner)
        _emit(payload)
    else:
        if not args.allocation:
            raise InvalidInputError("minimize over a fixed allocation requires --allocation")
        alloc = gio.read_allocation(args.allocation, inst)
        result = min_dubious(inst, alloc, variant, args.budget)
        _emit(_solve_payload(result))
    return 0 if result.exact else 3


def _cmd_experiment(args) -> int:
    cfg = load_experiment_config(args.config)
    records = run_experiment(cfg, workers=args.workers)
    _write_csv(records, args.out)
    print(f"experiment written to {args.out}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chorefair")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate instances")
    gen_sub = gen.add_subparsers(dest="kind", required=True)
    syn = gen_sub.add_parser("synthetic")
    syn.add_argument("--n", type=int, required=True)
    syn.add_argument("--m", type=int, required=True)
    syn.add_argument("--trial", type=int, default=0)
    syn.add_argument("--p-neg", type=float, default=0.7)
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--force-last-common", action=argparse.BooleanOptionalAction, default=True)
    syn.add_argument("--allow-m-lt-n", action="store_true")
    syn.add_argument("--out", required=True)
    syn.set_defaults(func=_cmd_gen, kind="synthetic")
    for kind in ("partition", "setsplitting", "rx3c"):
        red = gen_sub.add_parser(kind)
        red.add_argument("--values", help="comma-separated multiset (partition)")
        red.add_argument("--universe", help="comma-separated universe elements")
        red.add_argument("--sets", help="semicolon-separated, comma-delimited subsets")
        red.add_argument("--k", type=int, default=1)
        red.add_argument("--out", required=True)
        red.add_argument("--alloc-out")
        red.set_defaults(func=_cmd_gen, kind=kind)

    alloc_p = sub.add_parser("allocate", help="run an allocation algorithm")
    alloc_p.add_argument("--algo", choices=("rr", "envygraph", "binary", "bivalued", "twotypes"), required=True)
    alloc_p.add_argument("--instance", required=True)
    alloc_p.add_argument("--out")
    alloc_p.add_argument("--witness-out")
    alloc_p.add_argument("--prices-out")
    alloc_p.set_defaults(func=_cmd_allocate)

    ver = sub.add_parser("verify", help="check a property of an allocation")
    ver.add_argument("--check", choices=("ef", "ef1", "po", "pef1", "equilibrium", "def"), required=True)
    ver.add_argument("--instance", required=True)
    ver.add_argument("--allocation", required=True)
    ver.add_argument("--witness")
    ver.add_argument("--prices")
    ver.add_argument("--k", type=int)
    ver.add_argument("--variant", choices=("def", "sdef", "pdef"), default="def")
    ver.add_argument("--po-method", choices=("auto", "brute", "binary_fast"), default="auto")
    ver.add_argument("--budget", type=int, default=DEFAULT_NODE_BUDGET)
    ver.set_defaults(func=_cmd_verify)

    minp = sub.add_parser("minimize", help="minimize the number of dubious chores")
    minp.add_argument("--instance", required=True)
    minp.add_argument("--allocation")
    minp.add_argument("--variant", choices=("def", "sdef", "pdef"), default="def")
    minp.add_argument("--over-allocations", action="store_true")
    minp.add_argument("--po-only", action="store_true")
    minp.add_argument("--budget", type=int, default=DEFAULT_NODE_BUDGET)
    minp.set_defaults(func=_cmd_minimize)

    exp = sub.add_parser("experiment", help="run the seeded grid sweep")
    exp.add_argument("--config", required=True)
    exp.add_argument("--out", required=True)
    exp.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    exp.set_defaults(func=_cmd_experiment)
    return parser


def cli_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceededError as exc:
        print(f"budget: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))
