"""Command-line front end: solve, encode, generate, stats, oracle, bench."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .cnf import write_dimacs, write_wcnf
from .encode_cse import cse_size_report, encode_cse_base
from .encode_org import EncodeOptions, encode_org_base, org_peak_layer_binary
from .instance import (
    InstanceError,
    ParseError,
    analytic_bounds,
    format_instance,
    generate_powers,
    read_instance,
)
from .optimize import METHODS, CORE_METHODS, DriverConfig, optimize
from .precedence import closure
from .solvers.maxsat import MaxSatConfigError, MaxSatProtocolError
from .solvers.sessions import BackendError
from .varmap import EncodingError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_TIMEOUT = 4

log = logging.getLogger("salbp3pm")


def _method(text: str) -> str:
    key = text.replace("-", "_").lower()
    if key not in METHODS:
        raise argparse.ArgumentTypeError(f"unknown method {text!r} (choose from {', '.join(METHODS)})")
    return key


def _power_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    if not 1 <= lo <= hi:
        raise argparse.ArgumentTypeError(f"need 1 <= lo <= hi, got {text!r}")
    return lo, hi


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return text == "on"


def _instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("instance", help="instance file (native format, or .alb/.IN2)")
    p.add_argument("--format", choices=["native", "alb"], help="override format detection")
    p.add_argument("--cycle-time", type=int, help="cycle time for SALBP files")
    p.add_argument("--stations", type=int, help="station count for SALBP files (default: minimum)")
    p.add_argument("--seed", type=int, default=0, help="seed for missing powers and solvers")
    p.add_argument("--power-range", type=_power_range, default=(1, 10), metavar="LO:HI")


def _encoding_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pruning", type=_on_off, default=True, metavar="on|off")
    p.add_argument("--extended-edges", type=_on_off, default=None, metavar="on|off",
                   help="precedence over the transitive closure (default: on for cse, off for org)")
    p.add_argument("--sat12", choices=["off", "force"], default="off")


def _driver_args(p: argparse.ArgumentParser, bench: bool = False) -> None:
    if not bench:
        p.add_argument("--method", type=_method, default="cse_inc")
        p.add_argument("--encoder", choices=["org", "cse"])
    p.add_argument("--timeout", type=float, help="wall-clock budget in seconds")
    p.add_argument("--backend", default="embedded", help="embedded or pysat[:name]")
    p.add_argument("--maxsat-solver", default="embedded", help="embedded[:backend], rc2 or external")
    p.add_argument("--maxsat-cmd", help="external MaxSAT command template containing {wcnf}")
    p.add_argument("--blocking", choices=["witnessed", "minimized"], default="witnessed")
    p.add_argument("--init-iterations", type=int, default=10)
    p.add_argument("--no-persistent", action="store_true", help="rebuild the session each clause-blocking round")


def _load(args):
    kwargs = {}
    if args.cycle_time is not None:
        kwargs["cycle_time"] = args.cycle_time
    if args.stations is not None:
        kwargs["stations"] = args.stations
    inst = read_instance(args.instance, args.format, **kwargs)
    if inst.powers is None:
        inst = generate_powers(inst, args.seed, *args.power_range)
    return inst


def _options(args) -> EncodeOptions:
    return EncodeOptions(use_pruning=args.pruning, use_extended_edges=args.extended_edges, sat12=args.sat12)


def _config(args, method=None) -> DriverConfig:
    maxsat = args.maxsat_solver
    if args.maxsat_cmd and maxsat == "embedded":
        maxsat = "external"
    return DriverConfig(
        method=method or args.method,
        encoder=getattr(args, "encoder", None),
        timeout=args.timeout,
        init_iterations=args.init_iterations,
        blocking_scope=args.blocking,
        seed=args.seed,
        backend=args.backend,
        maxsat_solver=maxsat,
        maxsat_cmd=args.maxsat_cmd,
        persistent=not args.no_persistent,
        encode=_options(args),
    )


def _sink(path):
    if path in (None, "-"):
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="")


def cmd_solve(args) -> int:
    inst = _load(args)
    res = optimize(inst, _config(args))
    record = {"instance": inst.name, **res.to_dict()}
    out = _sink(args.out)
    try:
        if args.json:
            json.dump(record, out, indent=2)
            out.write("\n")
        else:
            out.write(f"instance   {inst.name} (n={inst.n} m={inst.m} c={inst.c})\n")
            out.write(f"method     {res.method} [{res.encoder}]\n")
            out.write(f"status     {res.status}\n")
            if res.best_peak is not None:
                sol = res.best_solution
                out.write(f"peak       {res.best_peak}\n")
                out.write(f"proof      {'yes' if res.proof_of_optimality else 'no'}\n")
                out.write("stations   " + " ".join(str(k + 1) for k in sol.assignment) + "\n")
                out.write("starts     " + " ".join(map(str, sol.start)) + "\n")
            out.write(f"iterations {res.iterations}\n")
            out.write(f"wall       {res.wall:.3f}s\n")
    finally:
        if out is not sys.stdout:
            out.close()
    if res.status == "infeasible":
        return EXIT_INFEASIBLE
    if res.status == "timeout":
        return EXIT_TIMEOUT
    return EXIT_OK


def cmd_encode(args) -> int:
    inst = _load(args)
    clo = closure(inst)
    encoder = encode_cse_base if args.encoder == "cse" else encode_org_base
    formula, vm = encoder(inst, clo, _options(args))
    out = _sink(args.out)
    try:
        if args.wcnf:
            bounds = analytic_bounds(inst)
            wcnf = org_peak_layer_binary(formula, vm, inst, bounds.lb, bounds.ub_analytic)
            write_wcnf(wcnf, out, style=args.wcnf_style)
        else:
            write_dimacs(formula, out)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_generate(args) -> int:
    from .generate import random_instance

    inst = random_instance(
        args.n, args.m, args.c, args.edge_prob, args.seed, args.power_range,
        max_duration=args.max_duration,
    )
    out = _sink(args.out)
    try:
        out.write(format_instance(inst))
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_stats(args) -> int:
    inst = _load(args)
    report = cse_size_report(inst, closure(inst), _options(args))
    clo = closure(inst)
    report["windows"] = [[f + 1, l + 1] for f, l in zip(clo.first, clo.last)]
    if args.json:
        json.dump(report, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return EXIT_OK
    print(f"{inst.name}: n={inst.n} m={inst.m} c={inst.c} |E|={report['edges']} |E*|={report['closure_edges']}")
    print(f"{'constraint':<28}{'org':>12}{'cse':>12}")
    for row in report["rows"]:
        print(f"{row['constraint']:<28}{row['org']:>12}{row['cse']:>12}")
    print(f"{'total clauses':<28}{report['org']['clause_total']:>12}{report['cse']['clause_total']:>12}")
    print(f"{'total variables':<28}{report['org']['var_total']:>12}{report['cse']['var_total']:>12}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .oracle import oracle_solve

    inst = _load(args)
    res = oracle_solve(inst, max_nodes=args.max_nodes)
    if not res.feasible:
        print("infeasible")
        return EXIT_INFEASIBLE
    sol = res.witness
    print(f"peak     {res.optimal_peak}")
    print("stations " + " ".join(str(k + 1) for k in sol.assignment))
    print("starts   " + " ".join(map(str, sol.start)))
    print(f"nodes    {res.nodes}")
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import collect_instances, run_bench, summarize, write_csv

    instances = collect_instances(args.instances, args.seed, args.power_range)
    if not instances:
        print(f"no instances under {args.instances}", file=sys.stderr)
        return EXIT_USAGE
    args.method = args.methods[0]
    base = _config(args)

    def progress(row):
        log.info("%s %s: %s peak=%s", row.instance, row.method, row.status, row.best_peak)

    rows = run_bench(instances, args.methods, base, jobs=args.jobs, progress=progress)
    out = _sink(args.out)
    try:
        write_csv(rows, out, omit_timing=args.omit_timing)
    finally:
        if out is not sys.stdout:
            out.close()
    summary = summarize(rows, omit_timing=args.omit_timing)
    if args.summary:
        Path(args.summary).write_text(summary, encoding="utf-8")
    else:
        sys.stderr.write(summary)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="salbp3pm", description="SAT-based power peak minimization for assembly lines.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="minimize the power peak of one instance")
    _instance_args(p)
    _encoding_args(p)
    _driver_args(p)
    p.add_argument("--json", action="store_true", help="print the result record as JSON")
    p.add_argument("--out", help="write the result here instead of stdout")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("encode", help="write the base CNF or the binary-peak WCNF")
    _instance_args(p)
    _encoding_args(p)
    p.add_argument("--encoder", choices=["org", "cse"], default="cse")
    p.add_argument("--wcnf", action="store_true", help="add the binary peak layer and write WCNF")
    p.add_argument("--wcnf-style", choices=["classic", "2022"], default="classic")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("generate", help="write a seeded random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--c", type=int, required=True)
    p.add_argument("--edge-prob", type=float, default=0.3)
    p.add_argument("--max-duration", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--power-range", type=_power_range, default=(1, 10), metavar="LO:HI")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("stats", help="clause and variable counts of both encodings")
    _instance_args(p)
    _encoding_args(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("oracle", help="brute-force optimum of a small instance")
    _instance_args(p)
    p.add_argument("--max-nodes", type=int, default=5_000_000)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="run instances x methods and report CSV + Markdown")
    p.add_argument("instances", help="instance file or directory (subdirectories are families)")
    p.add_argument("--methods", type=lambda s: [_method(m) for m in s.split(",")],
                   default=list(CORE_METHODS), help="comma-separated methods")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--power-range", type=_power_range, default=(1, 10), metavar="LO:HI")
    _encoding_args(p)
    _driver_args(p, bench=True)
    p.add_argument("--jobs", type=int, help="parallel cells (default: one per core)")
    p.add_argument("--out", help="CSV output (default stdout)")
    p.add_argument("--summary", help="Markdown summary output (default stderr)")
    p.add_argument("--omit-timing", action="store_true", help="blank the wall column for reproducible CSVs")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (OSError, ParseError, InstanceError, MaxSatConfigError, BackendError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (EncodingError, MaxSatProtocolError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
