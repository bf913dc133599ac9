import argparse
import dataclasses
import logging
import sys
from typing import Any, Dict, List, Optional

from termcolor import colored

from experiments import ExperimentRegistry
from formats.codec import (
    decode_deadline,
    decode_graph,
    decode_realization,
    decode_ug,
    decode_witness,
    encode_deadline,
    encode_graph,
    encode_realization,
    encode_ug,
    encode_witness,
    export_dot,
    read_document,
    write_document,
)
from models.digraph import PlainDigraph, TwoTypeDigraph, collapse_bit_vertices
from models.timecost import (
    brute_force_deadline,
    dvd_to_deadline,
    earliest_schedule,
    realization_cost,
    realization_from_deletion,
)
from models.unique_games import brute_force_opt, generate
from tools.gadget import GadgetParams, build_gadget, dictator_partition, verify_completeness
from tools.reduction import ReductionParams, instance_of, partition_from_labeling, ug_to_dvd, ug_to_fvs
from tools.solvers import SolverBudget, brute_force_dvd, brute_force_fvs, dvd_k_approx
from utils.config import Settings, load_settings
from utils.errors import FormatError, HForgeError, ParamError
from utils.logging import log_function, setup_logging
from utils.rationals import format_fraction, to_fraction

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def status(text: str, color: str = "green") -> None:
    """Human-facing status line on stderr; stdout stays machine-readable."""
    print(colored(text, color), file=sys.stderr)


def _plain_graph(path: str) -> PlainDigraph:
    g = decode_graph(read_document(path))
    if isinstance(g, TwoTypeDigraph):
        return collapse_bit_vertices(g)
    return g


def _two_type_graph(path: str) -> TwoTypeDigraph:
    g = decode_graph(read_document(path))
    if not isinstance(g, TwoTypeDigraph):
        raise FormatError(f"{path} holds a plain graph; a two-type graph is required")
    return g


def _ints(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ParamError(f"Expected comma-separated integers, got {text!r}") from None


# commands


@log_function(logger)
def cmd_gadget(args: argparse.Namespace, settings: Settings) -> int:
    L = args.L if args.problem == "dvd" else None
    g = build_gadget(GadgetParams(k=args.k, R=args.R, s_len=args.slen, L=L), settings.budget)
    write_document(encode_graph(g), args.output)
    status(f"{g.summary()}")
    return EXIT_OK


@log_function(logger)
def cmd_ug(args: argparse.Namespace, settings: Settings) -> int:
    kind = "satisfiable" if args.satisfiable else "random"
    instance = generate(kind, args.nv, args.nw, args.deg, args.R, args.seed)
    write_document(encode_ug(instance), args.output)
    status(f"{instance.summary()} ({kind}, seed={args.seed})")
    return EXIT_OK


@log_function(logger)
def cmd_reduce(args: argparse.Namespace, settings: Settings) -> int:
    if args.target == "dvd-to-deadline":
        g = _plain_graph(args.input)
        gamma = to_fraction(args.gamma) if args.gamma is not None else None
        inst = dvd_to_deadline(g, args.k, gamma)
        write_document(encode_deadline(inst), args.output)
        status(f"{inst.summary()}")
        return EXIT_OK
    instance = decode_ug(read_document(args.input))
    if args.target == "ug-fvs":
        g = ug_to_fvs(instance, ReductionParams(k=args.k, s_len=args.slen, t=args.t), settings.budget)
    else:
        g = ug_to_dvd(instance, ReductionParams(k=args.k, s_len=args.slen, t=args.t, L=args.L), settings.budget)
    write_document(encode_graph(g), args.output)
    status(f"{g.summary()}")
    return EXIT_OK


@log_function(logger)
def cmd_witness(args: argparse.Namespace, settings: Settings) -> int:
    g = _two_type_graph(args.graph)
    if args.source == "dictator":
        witness = dictator_partition(g, args.s)
    else:
        instance = decode_ug(read_document(args.ug)) if args.ug else instance_of(g)
        if args.planted:
            if instance.planted is None:
                raise ParamError("The instance carries no planted labeling")
            rho = dict(instance.planted)
        else:
            _, rho = brute_force_opt(instance, settings.budget)
        witness = partition_from_labeling(g, rho, instance).witness
    write_document(encode_witness(witness), args.output)
    status(witness.summary())
    return EXIT_OK


@log_function(logger)
def cmd_verify(args: argparse.Namespace, settings: Settings) -> int:
    if args.check == "deadline":
        inst = decode_deadline(read_document(args.instance))
        x = decode_realization(read_document(args.realization))
        schedule = earliest_schedule(inst, x)
        feasible = schedule.makespan <= inst.deadline
        write_document(
            {
                "feasible": feasible,
                "makespan": schedule.makespan,
                "deadline": inst.deadline,
                "cost": realization_cost(inst, x),
                "start": schedule.start,
            },
            args.output,
        )
        status(
            f"{'feasible' if feasible else 'infeasible'}: makespan {format_fraction(schedule.makespan)}",
            "green" if feasible else "red",
        )
        return EXIT_OK if feasible else EXIT_FAILED

    g = _two_type_graph(args.graph)
    witness = decode_witness(read_document(args.witness))
    classes = [args.cls] if args.cls is not None else list(range(g.k))
    reports = [verify_completeness(g, witness, j) for j in classes]
    ok = all(r.ok for r in reports)
    write_document({"ok": ok, "classes": [r.detail for r in reports]}, args.output)
    status(f"completeness {'ok' if ok else 'FAILED'} for classes {classes}", "green" if ok else "red")
    return EXIT_OK if ok else EXIT_FAILED


@log_function(logger)
def cmd_solve(args: argparse.Namespace, settings: Settings) -> int:
    budget = SolverBudget(max_subsets=settings.budget, max_n=settings.max_n)
    if args.problem == "deadline":
        inst = decode_deadline(read_document(args.input))
        cost, x = brute_force_deadline(inst, settings.budget)
        write_document(dict(encode_realization(x), cost=cost), args.output)
        status(f"minimum cost {format_fraction(cost)}")
        return EXIT_OK
    if args.problem == "ug":
        instance = decode_ug(read_document(args.input))
        val, rho = brute_force_opt(instance, settings.budget)
        write_document({"problem": "ug", "val": val, "labeling": rho}, args.output)
        status(f"OPT = {format_fraction(val)}")
        return EXIT_OK

    g = _plain_graph(args.input)
    if args.problem == "fvs":
        solution = brute_force_fvs(g, budget)
    elif args.problem == "dvd":
        solution = brute_force_dvd(g, args.k, budget)
    else:
        solution = dvd_k_approx(g, args.k)
    write_document(
        {"problem": args.problem, "k": args.k, "size": len(solution), "solution": sorted(solution)},
        args.output,
    )
    status(f"{args.problem}: {len(solution)} vertices")
    return EXIT_OK


@log_function(logger)
def cmd_realize(args: argparse.Namespace, settings: Settings) -> int:
    inst = decode_deadline(read_document(args.instance))
    g = _plain_graph(args.graph)
    x = realization_from_deletion(inst, g, _ints(args.delete))
    write_document(encode_realization(x), args.output)
    status(f"realization with cost {format_fraction(realization_cost(inst, x))}")
    return EXIT_OK


@log_function(logger)
def cmd_experiment(args: argparse.Namespace, settings: Settings) -> int:
    if args.list or not args.name:
        for name in sorted(ExperimentRegistry):
            print(f"{name}: {ExperimentRegistry[name].description()}")
        return EXIT_OK
    if args.name not in ExperimentRegistry:
        raise ParamError(f"Unknown experiment {args.name!r}; see experiment --list")
    params: Dict[str, Any] = {
        "k": args.k,
        "R": args.R,
        "slen": args.slen,
        "fn": args.fn,
        "mode": args.mode,
        "trials": args.trials,
        "max_n": args.max_n,
        "gamma": args.gamma,
        "count": args.count,
        "fraction": args.fraction,
        "functions": args.functions,
    }
    experiment = ExperimentRegistry[args.name](settings)
    known = set(experiment.defaults)
    report = experiment.run({k: v for k, v in params.items() if k in known}, args.seed)
    write_document(report.to_payload(), args.output)
    if args.csv:
        report.write_csv(args.csv)
    status(f"{args.name}: {report.summary_line()}")
    return EXIT_OK


@log_function(logger)
def cmd_export(args: argparse.Namespace, settings: Settings) -> int:
    text = export_dot(decode_graph(read_document(args.input)))
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
    return EXIT_OK


# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="Seed for every random choice")
    common.add_argument("--budget", type=int, default=None, help="Enumeration budget (default HFORGE_BUDGET)")
    common.add_argument("-o", "--output", default=None, help="Output file (default stdout)")
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    common.add_argument("--log-file", default=None, help="Also log to this file")

    parser = argparse.ArgumentParser(prog="hforge", description="Hardness-of-approximation gadget toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    gadget = commands.add_parser("gadget", help="Build a dictatorship gadget")
    gadget_kinds = gadget.add_subparsers(dest="problem", required=True)
    for problem in ("fvs", "dvd"):
        sub = gadget_kinds.add_parser(problem, parents=[common])
        sub.add_argument("--k", type=int, required=True)
        sub.add_argument("--R", type=int, required=True)
        sub.add_argument("--slen", type=int, required=True)
        if problem == "dvd":
            sub.add_argument("--L", type=int, required=True)
        sub.set_defaults(handler=cmd_gadget)

    ug = commands.add_parser("ug", parents=[common], help="Generate a Unique Games instance")
    kind = ug.add_mutually_exclusive_group()
    kind.add_argument("--satisfiable", action="store_true")
    kind.add_argument("--random", action="store_true")
    ug.add_argument("--nv", type=int, required=True)
    ug.add_argument("--nw", type=int, required=True)
    ug.add_argument("--deg", type=int, required=True)
    ug.add_argument("--R", type=int, required=True)
    ug.set_defaults(handler=cmd_ug)

    reduce = commands.add_parser("reduce", help="Run a reduction")
    targets = reduce.add_subparsers(dest="target", required=True)
    for target in ("ug-fvs", "ug-dvd"):
        sub = targets.add_parser(target, parents=[common])
        sub.add_argument("-i", "--input", required=True, help="hforge-ug-v1 file")
        sub.add_argument("--k", type=int, required=True)
        sub.add_argument("--slen", type=int, required=True)
        sub.add_argument("--t", type=int, default=1)
        if target == "ug-dvd":
            sub.add_argument("--L", type=int, required=True)
        sub.set_defaults(handler=cmd_reduce)
    sub = targets.add_parser("dvd-to-deadline", parents=[common])
    sub.add_argument("-i", "--input", required=True, help="hforge-graph-v1 DAG")
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--gamma", default=None, help="Closure margin as p/q")
    sub.set_defaults(handler=cmd_reduce)

    witness = commands.add_parser("witness", help="Emit a completeness witness")
    sources = witness.add_subparsers(dest="source", required=True)
    sub = sources.add_parser("dictator", parents=[common])
    sub.add_argument("--graph", required=True)
    sub.add_argument("--s", type=int, required=True)
    sub.set_defaults(handler=cmd_witness)
    sub = sources.add_parser("labeling", parents=[common])
    sub.add_argument("--graph", required=True)
    sub.add_argument("--ug", default=None, help="Instance file; defaults to the one embedded in the graph")
    sub.add_argument("--planted", action="store_true", help="Use the planted labeling instead of OPT")
    sub.set_defaults(handler=cmd_witness)

    verify = commands.add_parser("verify", help="Check a witness or a realization")
    checks = verify.add_subparsers(dest="check", required=True)
    sub = checks.add_parser("completeness", parents=[common])
    sub.add_argument("--witness", required=True)
    sub.add_argument("--graph", required=True)
    sub.add_argument("--class", dest="cls", type=int, default=None, help="Class j (default: every class)")
    sub.set_defaults(handler=cmd_verify)
    sub = checks.add_parser("deadline", parents=[common])
    sub.add_argument("--instance", required=True)
    sub.add_argument("--realization", required=True)
    sub.set_defaults(handler=cmd_verify)

    solve = commands.add_parser("solve", help="Run an exact or approximate solver")
    problems = solve.add_subparsers(dest="problem", required=True)
    for problem in ("fvs", "dvd", "dvd-approx", "deadline", "ug"):
        sub = problems.add_parser(problem, parents=[common])
        sub.add_argument("-i", "--input", required=True)
        sub.add_argument("--k", type=int, required=problem in ("dvd", "dvd-approx"), default=None)
        sub.set_defaults(handler=cmd_solve)

    realize = commands.add_parser("realize", parents=[common], help="Realization for a DVD deletion set")
    realize.add_argument("--instance", required=True)
    realize.add_argument("--graph", required=True)
    realize.add_argument("--delete", default="", help="Comma-separated vertex indices")
    realize.set_defaults(handler=cmd_realize)

    experiment = commands.add_parser("experiment", parents=[common], help="Run a registered experiment")
    experiment.add_argument("name", nargs="?", default=None)
    experiment.add_argument("--list", action="store_true", help="List experiments and exit")
    experiment.add_argument("--csv", default=None, help="Also write the result table as CSV")
    experiment.add_argument("--k", type=int, nargs="+", default=None)
    experiment.add_argument("--R", type=int, default=None)
    experiment.add_argument("--slen", type=int, default=None)
    experiment.add_argument("--fn", action="append", default=None, help="dictator:<s>, majority, parity, random:<seed>")
    experiment.add_argument("--mode", choices=["exact", "sampled"], default=None)
    experiment.add_argument("--trials", type=int, default=None)
    experiment.add_argument("--max-n", dest="max_n", type=int, default=None)
    experiment.add_argument("--gamma", default=None)
    experiment.add_argument("--count", type=int, default=None)
    experiment.add_argument("--fraction", default=None)
    experiment.add_argument("--functions", type=int, default=None)
    experiment.set_defaults(handler=cmd_experiment)

    export = commands.add_parser("export", help="Export a graph")
    formats = export.add_subparsers(dest="target", required=True)
    sub = formats.add_parser("dot", parents=[common])
    sub.add_argument("-i", "--input", required=True)
    sub.set_defaults(handler=cmd_export)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = load_settings()
    except ValueError as exc:
        status(str(exc), "red")
        return EXIT_USAGE
    if args.budget is not None:
        if args.budget < 1:
            parser.error("--budget must be positive")
        settings = dataclasses.replace(settings, budget=args.budget)
    setup_logging(logging.DEBUG if args.verbose else settings.level, args.log_file)
    try:
        return args.handler(args, settings)
    except HForgeError as exc:
        status(f"{type(exc).__name__}: {exc}", "red")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
