import argparse
import logging
import os
import sys
from typing import List, Optional, Tuple

from dotenv import load_dotenv
from pydantic import ValidationError

# Shared components
from shared.clients.oeis_client import (
    SEQUENCE_BINDINGS,
    binding_for,
    compare_sequence,
    fetch_bfile,
    save_fixture,
)
from shared.errors import HypersumError, OeisError
from shared.models import DataSource, EvalMethod, GridSpec, HypersumQuery, IdentityId, OutputFormat, RenderFormat

from engines.bench.core_bench import run_bench
from engines.hypersum_eval.core_eval import EvaluationSession, f_dispatch
from engines.poly_closed_form.core_poly import closed_form_poly, poly_render
from engines.verify.core_verify import run_all

from cli.render import bool_text, frame, render

logger = logging.getLogger(__name__)

# --- Exit Codes ---
EXIT_OK = 0
EXIT_FAILURE = 1       # verification / comparison failure, or an internal consistency error
EXIT_USAGE = 2
EXIT_EXTERNAL_DATA = 3

Outcome = Tuple[int, str]

# Failures listed per identity in text output; json and csv always carry every case.
TEXT_FAILURE_LIMIT = 20


# --- Subcommands ---

def cmd_eval(n: int, m: int, k: int, method: str, fmt: OutputFormat) -> Outcome:
    q = HypersumQuery(n=n, m=m, k=k)
    methods = list(EvalMethod) if method == "all" else [EvalMethod(method)]

    session = EvaluationSession()
    values = [f_dispatch(q, selected, session) for selected in methods]
    consensus = len(set(values)) == 1

    rows = [{"method": selected.value, "value": str(value)} for selected, value in zip(methods, values)]
    if OutputFormat(fmt) is OutputFormat.CSV:
        rows = [dict(row, consensus=bool_text(consensus)) for row in rows]
    document = {"query": q.model_dump(), "results": rows, "consensus": consensus}
    table = frame(rows, list(rows[0].keys()))

    footer = [f"consensus: {bool_text(consensus)}"]
    if not consensus:
        logger.warning(f"Methods disagree on F({n},{m},{k})")
    return (EXIT_OK if consensus else EXIT_FAILURE), render(fmt, document, table, footer=footer)


def cmd_poly(m: int, k: int, fmt: OutputFormat, style: RenderFormat = RenderFormat.PLAIN) -> Outcome:
    HypersumQuery(n=0, m=m, k=k)  # domain check only
    poly = closed_form_poly(m, k)
    fmt = OutputFormat(fmt)

    if fmt is OutputFormat.CSV:
        return EXIT_OK, poly_render(poly, RenderFormat.CSV)

    document = {
        "m": m,
        "k": k,
        "degree": poly.degree,
        "leading_coefficient": str(poly.leading_coefficient),
        "coefficients": [str(c) for c in poly.coeffs],
        "plain": poly_render(poly, RenderFormat.PLAIN),
        "latex": poly_render(poly, RenderFormat.LATEX),
    }
    lines = [
        f"F(n,{m},{k}) = {poly_render(poly, style)}",
        f"degree: {poly.degree}",
        f"leading coefficient: {poly.leading_coefficient}",
    ]
    return EXIT_OK, render(fmt, document, frame([], []), header=lines)


def cmd_verify(grid: GridSpec, identities: Optional[List[IdentityId]], fmt: OutputFormat) -> Outcome:
    report = run_all(grid, identities)
    fmt = OutputFormat(fmt)
    code = EXIT_OK if report.total_failures == 0 else EXIT_FAILURE

    cases = [
        case.model_dump(mode="json", by_alias=True, include={"identity", "n", "m", "k", "r", "lhs", "rhs", "passed"})
        for identity_report in report.identities
        for case in identity_report.cases
    ]
    if fmt is OutputFormat.CSV:
        return code, render(fmt, {}, frame(cases, ["identity", "n", "m", "k", "r", "lhs", "rhs", "pass"]))

    summary = report.summary()
    document = {
        "grid": grid.model_dump(),
        "summary": summary,
        "total_cases": report.total_cases,
        "total_failures": report.total_failures,
        "elapsed_seconds": report.elapsed_seconds,
        "cases": cases,
    }
    rows = [
        {"identity": identity, "cases": stats["cases"], "failures": stats["failures"],
         "elapsed_s": f"{stats['elapsed_seconds']:.3f}"}
        for identity, stats in summary.items()
    ]
    footer = []
    for identity_report in report.identities:
        for case in identity_report.failures[:TEXT_FAILURE_LIMIT]:
            point = f"n={case.n}, m={case.m}, k={case.k}" + (f", r={case.r}" if case.r is not None else "")
            footer.append(f"FAIL {case.identity.value} at {point}: {case.lhs} != {case.rhs}")
    footer.append(f"total: {report.total_cases} cases, {report.total_failures} failures")
    return code, render(fmt, document, frame(rows, ["identity", "cases", "failures", "elapsed_s"]), footer=footer)


def cmd_oeis_check(
    sequences: Optional[List[str]],
    count: int,
    source: DataSource,
    fmt: OutputFormat,
    directory: Optional[str] = None,
    write_fixtures: bool = False,
) -> Outcome:
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    bindings = [binding_for(s) for s in sequences] if sequences else [b for b in SEQUENCE_BINDINGS if b.cited]
    source = DataSource(source)

    reports = []
    for binding in bindings:
        bfile = fetch_bfile(binding.sequence_id, source, directory)
        if write_fixtures and source is DataSource.REMOTE:
            save_fixture(bfile, directory)
        reports.append(compare_sequence(binding, bfile, count))

    passed = all(report.passed for report in reports)
    document = {
        "source": source.value,
        "count": count,
        "passed": passed,
        "results": [dict(report.model_dump(mode="json"), passed=report.passed) for report in reports],
    }
    rows = [
        {"sequence": report.sequence_id, "m": report.m, "k": report.k, "count": report.count,
         "mismatches": len(report.mismatches), "passed": bool_text(report.passed)}
        for report in reports
    ]
    footer = []
    for report in reports:
        anchors = ", ".join(f"n={n} -> {value}" for n, value in report.anchors.items())
        footer.append(f"{report.sequence_id} F(n,{report.m},{report.k}): {anchors}")
        footer += [
            f"  MISMATCH n={miss.n} (index {miss.index}): computed {miss.expected}, b-file {miss.actual}"
            for miss in report.mismatches
        ]
    table = frame(rows, ["sequence", "m", "k", "count", "mismatches", "passed"])
    return (EXIT_OK if passed else EXIT_FAILURE), render(fmt, document, table, footer=footer)


def cmd_bench(grid: GridSpec, methods: List[EvalMethod], repetitions: int, fmt: OutputFormat) -> Outcome:
    results = run_bench(grid, methods, repetitions)
    rows = [
        {"method": result.method.value, "evaluations": result.evaluations, "repetitions": result.repetitions,
         "wall_seconds": round(result.wall_seconds, 6), "values_hash": result.values_hash}
        for result in results
    ]
    document = {"grid": grid.model_dump(), "repetitions": repetitions, "results": rows}
    footer = [f"values hash consensus: {results[0].values_hash}"] if results else []
    table = frame(rows, ["method", "evaluations", "repetitions", "wall_seconds", "values_hash"])
    return EXIT_OK, render(fmt, document, table, footer=footer)


# --- Argument Parsing ---

def _method_list(text: str) -> List[EvalMethod]:
    try:
        return [EvalMethod(part.strip()) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"unknown method in {text!r}; choose from {[m.value for m in EvalMethod]}") from e


def _add_grid_flags(parser: argparse.ArgumentParser, n_max: int, m_max: int, k_max: int):
    parser.add_argument("--n-max", type=int, default=n_max)
    parser.add_argument("--m-max", type=int, default=m_max)
    parser.add_argument("--k-max", type=int, default=k_max)


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted before or after the subcommand
    shared_flags = argparse.ArgumentParser(add_help=False)
    shared_flags.add_argument("--format", choices=[f.value for f in OutputFormat], default=argparse.SUPPRESS)
    shared_flags.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(
        prog="hypersum",
        description="Exact evaluation and identity checks for nested power sums F(n,m,k).",
    )
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.TEXT.value)
    parser.add_argument("--quiet", action="store_true", default=False, help="Only log warnings and errors.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    p_eval = subparsers.add_parser("eval", parents=[shared_flags], help="Evaluate F(n,m,k).")
    p_eval.add_argument("--n", type=int, required=True)
    p_eval.add_argument("--m", type=int, required=True)
    p_eval.add_argument("--k", type=int, required=True)
    p_eval.add_argument("--method", choices=[m.value for m in EvalMethod] + ["all"], default="all")

    p_poly = subparsers.add_parser("poly", parents=[shared_flags], help="Derive F(.,m,k) as a polynomial in n.")
    p_poly.add_argument("--m", type=int, required=True)
    p_poly.add_argument("--k", type=int, required=True)
    p_poly.add_argument("--style", choices=[RenderFormat.PLAIN.value, RenderFormat.LATEX.value],
                        default=RenderFormat.PLAIN.value, help="Rendering used by text output.")

    p_verify = subparsers.add_parser("verify", parents=[shared_flags], help="Check every identity over a grid.")
    _add_grid_flags(p_verify, 30, 8, 6)
    p_verify.add_argument("--identity", action="append", choices=[i.value for i in IdentityId],
                          help="Restrict to one identity; repeatable.")

    p_oeis = subparsers.add_parser("oeis-check", parents=[shared_flags], help="Compare against OEIS b-files.")
    p_oeis.add_argument("--sequence", action="append", help="A-number to check; repeatable.")
    p_oeis.add_argument("--count", type=int, default=20)
    p_oeis.add_argument("--source", choices=[s.value for s in DataSource], default=DataSource.FIXTURE.value)
    p_oeis.add_argument("--fixture-dir", default=None, help="Overrides OEIS_FIXTURE_DIR.")
    p_oeis.add_argument("--write-fixtures", action="store_true",
                        help="With --source remote, store the downloaded b-files as fixtures.")

    p_bench = subparsers.add_parser("bench", parents=[shared_flags], help="Time the evaluation strategies.")
    _add_grid_flags(p_bench, 200, 8, 6)
    p_bench.add_argument("--methods", type=_method_list, default=list(EvalMethod))
    p_bench.add_argument("--repetitions", type=int, default=1)

    return parser


def _configure_logging(quiet: bool):
    requested = os.getenv("HYPERSUM_LOG_LEVEL", "INFO").upper()
    known = requested in logging.getLevelNamesMapping()
    level = logging.WARNING if quiet else (requested if known else logging.INFO)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)
    if not known:
        logger.warning(f"Unknown HYPERSUM_LOG_LEVEL {requested!r}, using INFO")


def dispatch(args: argparse.Namespace) -> Outcome:
    fmt = OutputFormat(args.format)
    if args.command == "eval":
        return cmd_eval(args.n, args.m, args.k, args.method, fmt)
    if args.command == "poly":
        return cmd_poly(args.m, args.k, fmt, RenderFormat(args.style))
    if args.command == "verify":
        grid = GridSpec(n_max=args.n_max, m_max=args.m_max, k_max=args.k_max)
        return cmd_verify(grid, args.identity, fmt)
    if args.command == "oeis-check":
        return cmd_oeis_check(args.sequence, args.count, DataSource(args.source), fmt,
                              args.fixture_dir, args.write_fixtures)
    if args.command == "bench":
        grid = GridSpec(n_max=args.n_max, m_max=args.m_max, k_max=args.k_max)
        return cmd_bench(grid, args.methods, args.repetitions, fmt)
    raise ValueError(f"unknown command {args.command!r}")


def main(argv: Optional[List[str]] = None) -> int:
    """CLI entry point. Returns the process exit code instead of exiting."""
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 on --help
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    _configure_logging(args.quiet)

    try:
        code, output = dispatch(args)
    except ValidationError as e:
        logger.error(f"Invalid arguments: {e.errors(include_url=False)}")
        print(f"error: invalid arguments: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OeisError as e:
        logger.error(f"External data error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_EXTERNAL_DATA
    except HypersumError as e:
        logger.critical(f"Consistency failure: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except ValueError as e:
        logger.error(f"Invalid arguments: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    sys.stdout.write(output)
    return code


if __name__ == "__main__":
    sys.exit(main())
