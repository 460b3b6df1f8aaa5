"""Command line interface: ``symplan {solve,generate,validate,encode,stats,pattern}``.

Problems are given either as a PDDL domain/problem pair or as one native
``.nplan.json`` file. Structured output goes to stdout as JSON, logs to
stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import pddl
from .analysis import Pattern, arpg_pattern
from .encoders import DecodeSoundnessError, ENCODINGS, EncodingError, EncodingSpec, assemble_bound
from .engine import DEFAULT_SOLVER_CMD, SolverConfig, solve
from .formula import FormulaError, SolverProtocolError
from .generators import BenchmarkSpec, GeneratorError
from .model import ModelError, Plan, Problem, validate_plan

log = logging.getLogger("symplan")

EXIT_PLAN, EXIT_EXHAUSTED, EXIT_ERROR, EXIT_TIMEOUT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def load_problem(inputs: list[str]) -> Problem:
    if len(inputs) == 1:
        path = Path(inputs[0])
        if not path.name.endswith(".json"):
            raise UsageError("a single input must be a native .nplan.json problem; otherwise give DOMAIN PROBLEM")
        return pddl.loads_native(path.read_text())
    if len(inputs) == 2:
        return pddl.load(Path(inputs[0]).read_text(), Path(inputs[1]).read_text())
    raise UsageError("expected DOMAIN PROBLEM or one .nplan.json file")


def encoding_spec(p: Problem, args) -> EncodingSpec:
    kind = args.encoding
    order = pattern = None
    if getattr(args, "order_file", None):
        if kind != "r2e":
            raise UsageError("--order-file only applies to --encoding r2e")
        order = Pattern.from_text(Path(args.order_file).read_text()).occurrences
    if getattr(args, "pattern_file", None):
        if kind != "pattern":
            raise UsageError("--pattern-file only applies to --encoding pattern")
        pattern = Pattern.from_text(Path(args.pattern_file).read_text())
    elif kind == "pattern":
        pattern = arpg_pattern(p, args.seed)
        log.info("ARPG pattern (seed %d): %s", args.seed, "; ".join(pattern))
    if pattern is not None and not pattern.is_complete(p):
        log.warning("pattern does not mention every action: no completeness guarantee")
    return EncodingSpec(kind, order=order, pattern=pattern)


def cmd_solve(args) -> int:
    p = load_problem(args.inputs)
    spec = encoding_spec(p, args)
    cfg = SolverConfig(command=args.solver_cmd, timeout=args.timeout_per_bound, incremental=args.incremental,
                       on_unknown=args.on_unknown, on_timeout=args.on_timeout, schedule=args.schedule,
                       start_bound=args.start_bound, dump_dir=Path(args.dump_smt) if args.dump_smt else None,
                       validate=args.validate)
    result = solve(p, spec, args.max_bound, cfg)
    out = result.to_json()
    out["encoding"] = spec.kind
    out["problem"] = p.name
    if result.plan is not None:
        out["plan"] = [[n, k] for n, k in result.plan.steps]
        if args.plan_out:
            Path(args.plan_out).write_text(result.plan.to_text())
            out["plan_file"] = args.plan_out
    _emit(out, args.stats_out)
    return result.exit_code


def cmd_generate(args) -> int:
    spec = BenchmarkSpec(args.family, tuple(args.params))
    domain, problem = spec.generate()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dpath, ppath = out / f"{args.family}-domain.pddl", out / f"{spec.name}.pddl"
    dpath.write_text(domain)
    ppath.write_text(problem)
    _emit({"domain": str(dpath), "problem": str(ppath)})
    return 0


def cmd_validate(args) -> int:
    p = load_problem(args.inputs)
    plan = Plan.from_text(Path(args.plan).read_text())
    report = validate_plan(p, plan)
    _emit(report.to_json())
    return 0 if report.valid else 1


def cmd_encode(args) -> int:
    p = load_problem(args.inputs)
    eb = assemble_bound(p, encoding_spec(p, args), args.bound)
    text = eb.to_smtlib(header=[f"{p.name} encoding={args.encoding} bound={args.bound}"])
    if args.out:
        Path(args.out).write_text(text)
        _emit(eb.stats())
    else:
        sys.stdout.write(text)
    return 0


def cmd_stats(args) -> int:
    p = load_problem(args.inputs)
    stats = assemble_bound(p, encoding_spec(p, args), args.bound).stats()
    stats["num_actions"] = len(p.actions)
    _emit(stats)
    return 0


def cmd_pattern(args) -> int:
    p = load_problem(args.inputs)
    sys.stdout.write(arpg_pattern(p, args.seed).to_text())
    return 0


def _emit(obj, path: str | None = None) -> None:
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    sys.stdout.write(text)


def _add_encoding_flags(sp) -> None:
    sp.add_argument("--encoding", choices=ENCODINGS, default="pattern")
    sp.add_argument("--seed", type=int, default=0, help="seed for shuffling ARPG layers")
    sp.add_argument("--order-file", help="total order of actions for r2e, one name per line")
    sp.add_argument("--pattern-file", help="pattern for the pattern encoding, one occurrence per line")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symplan", description="Symbolic numeric planning via SMT")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="find a plan by bound deepening")
    s.add_argument("inputs", nargs="+", metavar="FILE")
    _add_encoding_flags(s)
    s.add_argument("--solver-cmd", default=DEFAULT_SOLVER_CMD)
    s.add_argument("--timeout-per-bound", type=float, default=None, metavar="SECONDS")
    s.add_argument("--max-bound", type=int, default=30)
    s.add_argument("--start-bound", type=int, default=1)
    s.add_argument("--schedule", choices=("linear", "geometric"), default="linear")
    s.add_argument("--incremental", action="store_true", help="keep one solver process, push/pop the goal")
    s.add_argument("--on-unknown", choices=("continue", "abort"), default="continue")
    s.add_argument("--on-timeout", choices=("continue", "abort"), default="abort")
    s.add_argument("--dump-smt", metavar="DIR", help="write bound_<n>.smt2 for every bound tried")
    s.add_argument("--validate", action=argparse.BooleanOptionalAction, default=True)
    s.add_argument("--plan-out", metavar="FILE")
    s.add_argument("--stats-out", metavar="FILE")
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("generate", help="write a benchmark domain and problem")
    g.add_argument("family", choices=("two-robots", "line-exchange"))
    g.add_argument("params", type=int, nargs="+", help="two-robots: X Q; line-exchange: N D Q")
    g.add_argument("--out", default=".")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("validate", help="check a plan")
    v.add_argument("inputs", nargs="+", metavar="FILE")
    v.add_argument("--plan", required=True)
    v.set_defaults(func=cmd_validate)

    e = sub.add_parser("encode", help="print the SMT-LIB query for one bound")
    e.add_argument("inputs", nargs="+", metavar="FILE")
    _add_encoding_flags(e)
    e.add_argument("--bound", type=int, default=1)
    e.add_argument("--out")
    e.set_defaults(func=cmd_encode)

    st = sub.add_parser("stats", help="formula size for one bound")
    st.add_argument("inputs", nargs="+", metavar="FILE")
    _add_encoding_flags(st)
    st.add_argument("--bound", type=int, default=1)
    st.set_defaults(func=cmd_stats)

    pt = sub.add_parser("pattern", help="print the ARPG pattern")
    pt.add_argument("inputs", nargs="+", metavar="FILE")
    pt.add_argument("--seed", type=int, default=0)
    pt.set_defaults(func=cmd_pattern)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, GeneratorError, EncodingError, pddl.PddlError, ModelError, FormulaError,
            SolverProtocolError, DecodeSoundnessError, OSError, ValueError) as e:
        log.error("%s", e)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
