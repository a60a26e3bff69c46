import json
import logging
from fractions import Fraction
from typing import Dict, List, NoReturn, Optional, Sequence

import click

from darboux_integrals._poly import VarTable
from darboux_integrals._types import (
    DEFAULT_CANDIDATE_CAP,
    CandidateCapError,
    CombineError,
    DarbouxError,
    IntegrationError,
    JacobianZeroError,
    SingularLocusError,
    UnsupportedSystemError,
    VerificationError,
)
from darboux_integrals.builder import (
    IntegralExpr,
    Target,
    combine,
    darboux_capacity,
    parse_integral,
    verify_integral_expr,
)
from darboux_integrals.corpus import parse_target, resolve_system, run_corpus
from darboux_integrals.inverse import (
    InverseResult,
    inverse_from_complex_pi,
    inverse_from_multiple_pi,
    inverse_system,
    parse_multiple,
    parse_polys,
    parse_row,
)
from darboux_integrals.jacobi import jacobi_general_integral, parse_matrix
from darboux_integrals.numeric import (
    DEFAULT_STEP,
    DEFAULT_TOLERANCE,
    IntegralEvaluator,
    check_conservation,
    check_multiplier_numeric,
    integrate_rk4,
)
from darboux_integrals.search import SearchConfig, search_planar
from darboux_integrals.system import SystemDef, format_system, parse_expr, parse_system
from darboux_integrals.verify import parse_candidate, verify_partial_integral

__all__ = ["cli"]

EXIT_OK = 0
EXIT_FAILED = 1


def _load_system(name: str) -> SystemDef:
    try:
        path = resolve_system(name)
        return parse_system(path.read_text())
    except (FileNotFoundError, ValueError) as err:
        raise click.BadParameter(str(err), param_hint="--system") from err


def _finish(
    command: str,
    passed: bool,
    results: List[Dict],
    diagnostics: Sequence[str],
    as_json: bool,
    lines: Sequence[str] = (),
) -> NoReturn:
    """Print the report and leave with 0 on success, 1 on failure"""
    if as_json:
        report = {
            "command": command,
            "status": "ok" if passed else "fail",
            "results": results,
            "diagnostics": list(diagnostics),
        }
        click.echo(json.dumps(report, indent=2))
    else:
        for line in lines:
            click.echo(line)
        for message in diagnostics:
            click.echo(message, err=True)
    click.get_current_context().exit(EXIT_OK if passed else EXIT_FAILED)


def _params(values: Sequence[str]) -> Dict[str, Fraction]:
    params = {}
    for item in values:
        name, equals, value = item.partition("=")
        if not equals:
            raise click.BadParameter(f"expected NAME=VALUE, got {item!r}")
        try:
            params[name.strip()] = Fraction(value.strip())
        except ValueError as err:
            raise click.BadParameter(f"{value!r} is not a rational") from err
    return params


_json_option = click.option(
    "--json", "as_json", is_flag=True, default=False, help="Print a JSON report."
)
_TARGET_HELP = '"first-integral", "last-multiplier", "pseudo:RHO" or "custom:EXPR".'
_system_option = click.option(
    "--system",
    "system_name",
    required=True,
    help="System file, or the name of a bundled one such as linear_focus.sys.",
)


@click.group(invoke_without_command=True)
@click.option(
    "--log-level",
    default="WARNING",
    type=click.Choice(
        ["CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"], case_sensitive=False
    ),
)
@click.version_option()
@click.pass_context
def cli(ctx, log_level: str):
    """Darboux partial integrals of polynomial ODE systems."""

    level = getattr(logging, log_level.upper(), None)
    logging.basicConfig(format="%(levelname)s:%(message)s", level=level)

    # if no command is supplied, print the help message
    if ctx.invoked_subcommand is None:
        click.echo(cli.get_help(ctx))


@cli.command()
@_system_option
@click.option(
    "--candidate",
    "candidates",
    multiple=True,
    required=True,
    help='Candidate such as "poly: z", "expfrac: Q / P" or "complex: x + i*y".',
)
@_json_option
def verify(system_name: str, candidates: Sequence[str], as_json: bool):
    """Check partial integral candidates and print their cofactors."""
    system = _load_system(system_name)
    results, lines, diagnostics = [], [], []
    passed = True
    for text in candidates:
        try:
            pi = parse_candidate(system.table, text)
        except ValueError as err:
            raise click.UsageError(str(err)) from err
        try:
            report = verify_partial_integral(system, pi)
        except VerificationError as err:
            passed = False
            diagnostics.append(f"{text}: {err}")
            results.append({"candidate": text, "verified": False, "reason": err.reason.value})
            continue
        entry = {
            "candidate": str(pi),
            "kind": pi.kind.value,
            "verified": True,
            "cofactor": str(report.primary),
        }
        line = f"{pi}: cofactor {report.primary}"
        if report.secondary is not None:
            entry["secondary"] = str(report.secondary)
            line += f", secondary {report.secondary}"
        results.append(entry)
        lines.append(line)
    _finish("verify", passed, results, diagnostics, as_json, lines)


@cli.command()
@_system_option
@click.option("--degree", type=int, required=True, help="Degree of the search.")
@click.option("--cofactor", default=None, help="Fixed cofactor, makes the search linear.")
@click.option(
    "--cap",
    type=int,
    default=DEFAULT_CANDIDATE_CAP,
    envvar="DARBOUX_CANDIDATE_CAP",
    show_default=True,
    help="Maximum number of top-part candidates.",
)
@click.option("--jobs", type=int, default=1, help="Worker threads.")
@_json_option
def search(
    system_name: str,
    degree: int,
    cofactor: Optional[str],
    cap: int,
    jobs: int,
    as_json: bool,
):
    """Find the Darboux polynomials of a given degree."""
    system = _load_system(system_name)
    try:
        M = parse_expr(cofactor, system.table) if cofactor else None
        cfg = SearchConfig(degree, M, cap, jobs)
    except ValueError as err:
        raise click.UsageError(str(err)) from err
    try:
        found = search_planar(system, cfg)
    except (CandidateCapError, UnsupportedSystemError) as err:
        _finish("search", False, [], [str(err)], as_json)
    results = [{"poly": str(p), "cofactor": str(M)} for p, M in found]
    lines = [f"{p}  [cofactor {M}]" for p, M in found] or ["none"]
    _finish("search", True, results, [], as_json, lines)


@cli.command(name="combine")
@_system_option
@click.option(
    "--pi",
    "--candidate",
    "candidates",
    multiple=True,
    required=True,
    help="Verified partial integral, repeated for each one.",
)
@click.option(
    "--target",
    default="first-integral",
    show_default=True,
    help=_TARGET_HELP,
)
@click.option("--time", "with_time", is_flag=True, help="Allow a time factor exp(-Phi(t)).")
@_json_option
def combine_command(
    system_name: str,
    candidates: Sequence[str],
    target: str,
    with_time: bool,
    as_json: bool,
):
    """Combine verified partial integrals into integrals or multipliers."""
    system = _load_system(system_name)
    try:
        pis = [parse_candidate(system.table, text) for text in candidates]
        goal, time_from_target = parse_target(target, system.table)
    except ValueError as err:
        raise click.UsageError(str(err)) from err
    try:
        exprs = combine(system, pis, goal, with_time or time_from_target)
    except (CombineError, VerificationError) as err:
        _finish("combine", False, [], [str(err)], as_json)
    results = [
        {
            "rendered": str(expr),
            "kind": expr.kind.value,
            "gamma": [str(g) for g in expr.gamma],
            "factors": [{"factor": str(pi), "exponent": str(g)} for pi, g in expr.factors],
            "time_factor": str(expr.time_factor),
            "verified": verify_integral_expr(system, expr),
        }
        for expr in exprs
    ]
    _finish("combine", True, results, [], as_json, [str(expr) for expr in exprs])


@cli.command()
@click.option(
    "--matrix",
    required=True,
    help='Coefficient rows "a1,a2,a3; b1,b2,b3; c1,c2,c3".',
)
@click.option(
    "--system",
    "show_system",
    is_flag=True,
    help="Also print the built system in the system file format.",
)
@_json_option
def jacobi(matrix: str, show_system: bool, as_json: bool):
    """Closed-form integrals of the Jacobi system of a 3x3 matrix."""
    try:
        A = parse_matrix(matrix)
    except ValueError as err:
        raise click.BadParameter(str(err), param_hint="--matrix") from err
    try:
        result = jacobi_general_integral(A)
    except DarbouxError as err:
        _finish("jacobi", False, [], [str(err)], as_json)
    system = result.model.system
    lines = [
        f"x' = {system.rhs[0]}",
        f"y' = {system.rhs[1]}",
        f"case: {result.case.value}",
        f"integral: {result.general_integral}",
    ]
    lines += [f"nonautonomous: {expr}" for expr in result.nonautonomous]
    lines += [f"singular factor: {p}" for p in result.singular_factors]
    entry = {
        "case": result.case.value,
        "eigenvalues": [
            str(e.value) for e in result.eigen.entries for _ in range(e.multiplicity)
        ],
        "system": [str(X) for X in system.rhs],
        "integral": str(result.general_integral),
        "nonautonomous": [str(expr) for expr in result.nonautonomous],
        "integrals": [
            _integral_entry(expr)
            for expr in [result.general_integral] + result.nonautonomous
        ],
        "singular_factors": [str(p) for p in result.singular_factors],
    }
    if show_system:
        entry["system_text"] = format_system(system)
        lines += ["", format_system(system).rstrip()]
    _finish("jacobi", True, [entry], [], as_json, lines)


def _integral_entry(expr: IntegralExpr) -> Dict:
    return {
        "rendered": str(expr),
        "autonomous": expr.time_factor.is_zero,
        "factors": [{"factor": str(pi), "exponent": str(g)} for pi, g in expr.factors],
        "time_factor": str(expr.time_factor),
    }


@cli.command()
@click.option("--vars", "states", required=True, help='State names, e.g. "x y".')
@click.option("--param", "parameters", default="", help='Parameter names, e.g. "a".')
@click.option(
    "--pi",
    "rows",
    multiple=True,
    help='"poly: G, cofactor: M" or "exp: OMEGA, cofactor: M", one per state.',
)
@click.option("--multiple", default=None, help='"p, M, h, q, N" for exp(q/p^h).')
@click.option("--complex", "complex_pi", default=None, help='"u, v, U, V".')
@_json_option
def inverse(
    states: str,
    parameters: str,
    rows: Sequence[str],
    multiple: Optional[str],
    complex_pi: Optional[str],
    as_json: bool,
):
    """Build the system that has the prescribed partial integrals."""
    if sum(bool(choice) for choice in (rows, multiple, complex_pi)) != 1:
        raise click.UsageError("give either --pi rows, --multiple or --complex")
    table = VarTable.build(states.split(), parameters.split())
    try:
        if multiple:
            result = inverse_from_multiple_pi(table, *parse_multiple(table, multiple))
        elif complex_pi:
            u, v, U, V = parse_polys(table, complex_pi, 4)
            result = inverse_from_complex_pi(table, u, v, U, V)
        else:
            result = _rows_result(table, rows)
    except JacobianZeroError as err:
        _finish("inverse", False, [], [str(err)], as_json)
    except ValueError as err:
        raise click.UsageError(str(err)) from err
    if result.system is None:
        diagnostic = f"column {result.column} leaves remainder {result.remainder}"
        results = [{"column": result.column, "remainder": str(result.remainder)}]
        _finish("inverse", False, results, [diagnostic], as_json)
    lines = [
        f"{name}' = {X}" for name, X in zip(result.system.states, result.system.rhs)
    ]
    results = [{"system": {n: str(X) for n, X in zip(result.system.states, result.system.rhs)}}]
    _finish("inverse", True, results, [], as_json, lines)


def _rows_result(table: VarTable, rows: Sequence[str]) -> InverseResult:
    return inverse_system(table, [parse_row(table, text) for text in rows])


@cli.command()
@_system_option
@click.option(
    "--integral",
    "factors",
    multiple=True,
    required=True,
    help='Factor "CANDIDATE @ EXPONENT", repeated for each factor.',
)
@click.option("--time-factor", default=None, help="Phi in the factor exp(-Phi(t)).")
@click.option("--target", default="first-integral", show_default=True, help=_TARGET_HELP)
@click.option("--x0", required=True, help='Initial state, e.g. "1,0".')
@click.option("--t0", type=float, default=0.0, show_default=True)
@click.option("--t1", type=float, default=1.0, show_default=True)
@click.option("--step", type=float, default=DEFAULT_STEP, show_default=True)
@click.option("--tol", type=float, default=DEFAULT_TOLERANCE, show_default=True)
@click.option("--param", "param_values", multiple=True, help="NAME=RATIONAL")
@_json_option
def check(
    system_name: str,
    factors: Sequence[str],
    time_factor: Optional[str],
    target: str,
    x0: str,
    t0: float,
    t1: float,
    step: float,
    tol: float,
    param_values: Sequence[str],
    as_json: bool,
):
    """Verify an integral exactly and follow it along a numerical trajectory."""
    system = _load_system(system_name)
    params = _params(param_values)
    try:
        goal, _ = parse_target(target, system.table)
        text = "; ".join(factors)
        if time_factor:
            text += f"; time: {time_factor}"
        expr = parse_integral(system.table, text, goal)
        start = [float(v) for v in x0.split(",")]
    except ValueError as err:
        raise click.UsageError(str(err)) from err
    exact = verify_integral_expr(system, expr)
    diagnostics = [] if exact else [f"{expr} does not satisfy its cofactor identity"]
    try:
        trajectory = integrate_rk4(system, start, t0, t1, step, params)
        evaluator = IntegralEvaluator(expr, params)
        if goal == Target.first_integral():
            drift = check_conservation(evaluator, trajectory, tol).drift
        else:
            drift = check_multiplier_numeric(system, evaluator, trajectory, params)
    except (IntegrationError, SingularLocusError) as err:
        _finish("check", False, [], diagnostics + [str(err)], as_json)
    except ValueError as err:
        raise click.UsageError(str(err)) from err
    passed = exact and drift <= tol
    if drift > tol:
        diagnostics.append(f"numeric residual {drift:.3e} exceeds {tol:.1e}")
    results = [
        {"rendered": str(expr), "exact": exact, "residual": drift, "tol": tol}
    ]
    lines = [f"{expr}", f"exact: {'yes' if exact else 'no'}", f"residual: {drift:.3e}"]
    _finish("check", passed, results, diagnostics, as_json, lines)


@cli.command()
@click.option("--n", type=int, required=True, help="Number of state variables.")
@click.option("--d", type=int, required=True, help="Degree of the system.")
@_json_option
def capacity(n: int, d: int, as_json: bool):
    """Partial integrals that guarantee a first integral."""
    try:
        value = darboux_capacity(n, d)
    except ValueError as err:
        raise click.UsageError(str(err)) from err
    _finish("capacity", True, [{"n": n, "d": d, "capacity": value}], [], as_json, [str(value)])


@cli.command()
@click.argument("files", nargs=-1)
@click.option("--jobs", type=int, default=1, help="Files checked in parallel.")
@click.option(
    "--cap",
    type=int,
    default=DEFAULT_CANDIDATE_CAP,
    envvar="DARBOUX_CANDIDATE_CAP",
)
@_json_option
def corpus(files: Sequence[str], jobs: int, cap: int, as_json: bool):
    """Run the directives of the bundled systems, or of the given FILES."""
    try:
        paths = [resolve_system(name) for name in files] if files else None
    except FileNotFoundError as err:
        raise click.BadParameter(str(err)) from err
    outcomes = run_corpus(paths, jobs, cap)
    failed = [o for o in outcomes if not o.passed]
    results = [
        {
            "source": o.source,
            "line": o.line,
            "directive": o.kind,
            "text": o.text,
            "passed": o.passed,
            "detail": o.detail,
        }
        for o in outcomes
    ]
    summary = f"{len(outcomes) - len(failed)} passed, {len(failed)} failed"
    _finish(
        "corpus",
        not failed,
        results,
        [summary],
        as_json,
        [str(o) for o in outcomes],
    )


# test with: python -m darboux_integrals
if __name__ == "__main__":
    cli()
