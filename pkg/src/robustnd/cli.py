"""Command-line front end: generate, solve, verify, report.

All numeric flags take exact rationals ("p/q" or integers; decimals are
rejected).  Results go to stdout as JSON; diagnostics and error JSON go to
stderr.  Exit codes: 0 success/pass, 1 verification failure, 2 usage or
parse error, 3 solver budget exceeded.  Identical inputs produce byte
identical outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import harness
from .flow import InfeasibleDemandError
from .gadgets import (
    DimacsError,
    GadgetError,
    VariableLimitError,
    gen_gadget,
    gen_hose,
    gen_two_path,
    parse_dimacs,
    satisfying_assignment,
)
from .model import (
    Instance,
    graph_from_obj,
    instance_from_json,
    instance_to_json,
    rat,
    rat_str,
    validate,
)
from .polytope import DimensionCapError, PolytopeError
from .solvers import (
    DEFAULT_MAX_ITERS,
    IterationLimitError,
    PathRestrictionError,
    SolverError,
    VertexUnavailableError,
    solver_for,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


class UsageError(Exception):
    pass


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _emit_error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": {"type": kind, "message": message}}) + "\n")


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _load_instance(path: str) -> Instance:
    try:
        instance = instance_from_json(_read_text(path))
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"{path}: malformed instance JSON ({exc})") from exc
    problems = validate(instance)
    if problems:
        raise UsageError(f"{path}: invalid instance: " + "; ".join(problems))
    return instance


def _parse_lambda(text: str, edge_count: int) -> tuple[Fraction, ...]:
    if text == "uniform":
        return tuple(Fraction(1) for _ in range(edge_count))
    try:
        values = tuple(rat(part) for part in text.split(","))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad cost vector {text!r}: {exc}") from exc
    if len(values) != edge_count:
        raise UsageError(
            f"cost vector has {len(values)} entries, instance has {edge_count} edges"
        )
    return values


def _parse_rho(text: str) -> Fraction:
    try:
        value = rat(text)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad rational {text!r}: {exc}") from exc
    return value


def _write_instance(instance: Instance, out: str | None) -> None:
    text = instance_to_json(instance) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_gen(args) -> int:
    if args.family == "gamma":
        phi = parse_dimacs(_read_text(args.cnf))
        instance = gen_gadget(phi, _parse_rho(args.rho), args.gamma, args.hint_budget)
    elif args.family == "twopath":
        phi = parse_dimacs(_read_text(args.cnf))
        instance = gen_two_path(phi, _parse_rho(args.rho), args.hint_budget)
    else:
        graph_obj = json.loads(_read_text(args.graph))
        graph = graph_from_obj(graph_obj)
        bounds_obj = json.loads(_read_text(args.bounds))
        bounds = [None if b is None else rat(b) for b in bounds_obj]
        instance = gen_hose(graph, bounds)
    _write_instance(instance, args.output)
    return EXIT_OK


def _cmd_solve(args) -> int:
    instance = _load_instance(args.instance)
    solver = solver_for(instance, args.dim_cap)
    problem = args.problem
    if problem == "cong-dyn":
        res = solver.cong_dynamic()
        _emit({"beta": rat_str(res.beta), "worst_vertex": [rat_str(x) for x in res.worst_vertex]})
    elif problem == "cong-static":
        res = solver.cong_static()
        _emit({"beta": rat_str(res.beta)})
    elif problem == "cong-lagrange":
        alpha = _parse_rho(args.alpha)
        beta, trace = solver.cong_lagrange(alpha=alpha, max_iters=args.max_iters)
        _emit(
            {
                "beta_tilde": rat_str(beta),
                "iterations": len(trace.iterations),
                "alpha": rat_str(alpha),
                "trace": [
                    {
                        "lambda": [rat_str(x) for x in it.lam],
                        "reservation": [rat_str(x) for x in it.reservation],
                        "master_value": rat_str(it.master_value),
                        "oracle_value": rat_str(it.oracle_value),
                    }
                    for it in trace.iterations
                ],
            }
        )
    elif problem == "lin-dyn":
        if args.lam is None:
            raise UsageError("lin-dyn requires --lambda")
        lam = _parse_lambda(args.lam, len(instance.graph.edges))
        res = solver.lin_dynamic(lam)
        _emit({"value": rat_str(res.value), "reservation": [rat_str(x) for x in res.reservation]})
    elif problem == "lin-static":
        if args.lam is None:
            raise UsageError("lin-static requires --lambda")
        lam = _parse_lambda(args.lam, len(instance.graph.edges))
        res = solver.lin_static(lam)
        _emit({"value": rat_str(res.value), "reservation": [rat_str(x) for x in res.reservation]})
    elif problem == "cong-one-path":
        _emit({"beta": rat_str(solver.cong_one_path())})
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown problem {problem!r}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.check == "dichotomy":
        phi = parse_dimacs(_read_text(args.cnf))
        report = harness.check_dichotomy(phi, _parse_rho(args.rho), args.gamma)
        _emit(report.to_obj())
        return EXIT_OK if report.passed else EXIT_FAIL
    if args.check == "cut":
        phi = parse_dimacs(_read_text(args.cnf))
        rho = _parse_rho(args.rho)
        if args.assignment is not None:
            assignment = int(args.assignment, 2)
        else:
            found = satisfying_assignment(phi)
            if found is None:
                raise UsageError("formula is unsatisfiable; provide a satisfiable one")
            assignment = found
        try:
            witness = harness.build_cut_witness(phi, assignment, rho, args.gamma)
        except harness.WitnessError as exc:
            _emit_error("witness", str(exc))
            return EXIT_FAIL
        _emit(witness.to_obj())
        return EXIT_OK
    reports = []
    ok = True
    for path in args.instances:
        instance = _load_instance(path)
        if args.check == "lagrange":
            report = harness.check_lagrange_gap(instance, dim_cap=args.dim_cap)
        else:
            report = harness.check_static_machinery(instance, dim_cap=args.dim_cap)
        obj = report.to_obj()
        obj["instance"] = path
        reports.append(obj)
        ok = ok and report.passed
    _emit(reports if len(reports) > 1 else reports[0])
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_report(args) -> int:
    header = f"{'instance':<40} {'|V|':>6} {'|E|':>6} {'|H|':>6} {'deg':>5} {'log(V/deg)':>11}"
    lines = [header]
    for path in args.instances:
        instance = _load_instance(path)
        metrics = harness.size_metrics(instance)
        log_term = metrics["log_nodes_over_degree"]
        lines.append(
            f"{path:<40} {metrics['nodes']:>6} {metrics['edges']:>6} "
            f"{metrics['commodities']:>6} {metrics['max_degree']:>5} "
            f"{log_term:>11.6f}"
        )
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robustnd",
        description="Robust network design under polyhedral demand uncertainty.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate instances")
    gen_sub = gen.add_subparsers(dest="family", required=True)
    for fam in ("gamma", "twopath"):
        g = gen_sub.add_parser(fam)
        g.add_argument("--cnf", required=True, help="DIMACS CNF file (3 literals per clause)")
        g.add_argument("--rho", required=True, help="gap constant as p/q in (0,1)")
        if fam == "gamma":
            g.add_argument("--gamma", type=int, required=True, help="recursion level >= 1")
        g.add_argument("--hint-budget", type=int, default=20000, dest="hint_budget")
        g.add_argument("-o", "--output", default=None)
    hose = gen_sub.add_parser("hose")
    hose.add_argument("--graph", required=True, help="graph JSON file")
    hose.add_argument("--bounds", required=True, help="JSON list of per-node bounds (null = non-terminal)")
    hose.add_argument("-o", "--output", default=None)

    solve = sub.add_parser("solve", help="solve a problem on an instance file")
    solve.add_argument(
        "problem",
        choices=["cong-dyn", "cong-static", "cong-lagrange", "lin-dyn", "lin-static", "cong-one-path"],
    )
    solve.add_argument("instance")
    solve.add_argument("--lambda", dest="lam", default=None, help='edge costs "p/q,p/q,..." or "uniform"')
    solve.add_argument("--alpha", default="1", help="oracle approximation ratio (trace metadata)")
    solve.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS, dest="max_iters")
    solve.add_argument("--dim-cap", type=int, default=12, dest="dim_cap")

    verify = sub.add_parser("verify", help="run a harness check; exit 0 iff it passes")
    verify_sub = verify.add_subparsers(dest="check", required=True)
    for chk in ("dichotomy", "cut"):
        v = verify_sub.add_parser(chk)
        v.add_argument("--cnf", required=True)
        v.add_argument("--rho", required=True)
        v.add_argument("--gamma", type=int, required=True)
        if chk == "cut":
            v.add_argument("--assignment", default=None, help="truth assignment bits, x1 = last bit")
    for chk in ("lagrange", "static"):
        v = verify_sub.add_parser(chk)
        v.add_argument("instances", nargs="+")
        v.add_argument("--dim-cap", type=int, default=12, dest="dim_cap")

    report = sub.add_parser("report", help="size metrics table")
    report.add_argument("instances", nargs="+")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_report(args)
    except (UsageError, DimacsError, GadgetError, SolverError, PolytopeError, InfeasibleDemandError) as exc:
        budget_types = (
            IterationLimitError,
            VertexUnavailableError,
            DimensionCapError,
            VariableLimitError,
        )
        if isinstance(exc, budget_types):
            _emit_error("budget", str(exc))
            return EXIT_BUDGET
        _emit_error("usage", str(exc))
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        _emit_error("usage", f"malformed JSON: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
