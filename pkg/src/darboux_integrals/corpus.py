# Regression corpus: system files carrying "#>" directives that state what must
# hold for the system they describe
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from ._poly import MultiPoly, VarTable
from ._scalar import Scalar
from ._types import DEFAULT_CANDIDATE_CAP, DarbouxError, VerificationError
from .builder import (
    Target,
    combine,
    dependent_integrals,
    parse_integral,
    verify_integral_expr,
)
from .inverse import (
    inverse_from_complex_pi,
    inverse_from_multiple_pi,
    inverse_system,
    parse_multiple,
    parse_polys,
    parse_row,
)
from .jacobi import jacobi_general_integral, parse_matrix
from .search import SearchConfig, search_planar
from .system import SystemDef, parse_expr, parse_system
from .verify import ComplexPI, parse_candidate, verify_partial_integral

__all__ = [
    "SYSTEMS_DIR",
    "Directive",
    "DirectiveOutcome",
    "bundled_systems",
    "parse_target",
    "read_directives",
    "resolve_system",
    "run_corpus",
    "run_directive",
    "run_file",
]

SYSTEMS_DIR = Path(__file__).parent / "systems"
DIRECTIVE_PREFIX = "#>"
TIME_SUFFIX = "+time"
# the colon that ends a combine target, followed by the first candidate
_CANDIDATE_START = re.compile(r":\s*(?=(?:poly|exp|expfrac|arctan|complex)\s*:)")


@dataclass(frozen=True)
class Directive:
    kind: str
    text: str
    line: int


@dataclass(frozen=True)
class DirectiveOutcome:
    """One checked directive.

    `source`: File name the directive came from
    `detail`: What was found, or why the check failed"""

    source: str
    line: int
    kind: str
    text: str
    passed: bool
    detail: str = ""

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        suffix = f"  [{self.detail}]" if self.detail else ""
        return f"{status} {self.source}:{self.line} {self.kind} {self.text}{suffix}"


def bundled_systems() -> List[Path]:
    return sorted(SYSTEMS_DIR.glob("*.sys"))


def resolve_system(name: str) -> Path:
    """A path as given, or else the bundled system of that file name"""
    path = Path(name)
    if path.exists():
        return path
    bundled = SYSTEMS_DIR / path.name
    if bundled.exists():
        return bundled
    raise FileNotFoundError(f"no system file {name!r} here or among the bundled ones")


def read_directives(text: str) -> List[Directive]:
    directives = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith(DIRECTIVE_PREFIX):
            kind, _, rest = stripped[len(DIRECTIVE_PREFIX) :].strip().partition(" ")
            directives.append(Directive(kind, rest.strip(), line_no))
    return directives


def parse_target(text: str, table: Optional[VarTable] = None) -> Tuple[Target, bool]:
    """Read "first-integral", "last-multiplier", "pseudo:RHO" or "custom:EXPR",
    each optionally followed by "+time" to allow time completion. "first",
    "multiplier" and "pseudo RHO" are accepted as short forms, and a custom
    expression needs the variable table it is written over.

    >>> str(parse_target("pseudo:1/2+time")[0])
    'pseudo:1/2'
    """
    body = text.strip()
    with_time = body.endswith(TIME_SUFFIX)
    if with_time:
        body = body[: -len(TIME_SUFFIX)].strip()
    kind, colon, argument = body.partition(":")
    if not colon:
        kind, _, argument = body.partition(" ")
    kind, argument = kind.strip(), argument.strip().strip('"').strip()
    match kind, argument:
        case ("first-integral" | "first"), "":
            return Target.first_integral(), with_time
        case ("last-multiplier" | "multiplier"), "":
            return Target.last_multiplier(), with_time
        case "pseudo", rho if rho and " " not in rho:
            return Target.pseudo(Fraction(rho)), with_time
        case "custom", expression if expression:
            if table is None:
                raise ValueError("a custom target needs the system it is written for")
            return Target.custom(parse_expr(expression, table)), with_time
        case _:
            raise ValueError(f"unknown target {text!r}")


def _expect(found: MultiPoly, text: str, system: SystemDef) -> Optional[str]:
    expected = parse_expr(text.strip(), system.table)
    if found != expected:
        return f"expected {expected}, got {found}"
    return None


def _check_verify(system: SystemDef, text: str) -> Tuple[bool, str]:
    candidate, _, expected = text.partition("=>")
    report = verify_partial_integral(system, parse_candidate(system.table, candidate))
    found = f"{report.primary}"
    if report.secondary is not None:
        found += f" | {report.secondary}"
    if expected.strip():
        primary, bar, secondary = expected.partition("|")
        problem = _expect(report.primary, primary, system)
        if problem is None and bar:
            assert report.secondary is not None
            problem = _expect(report.secondary, secondary, system)
        if problem is not None:
            return False, problem
    return True, found


def _check_reject(system: SystemDef, text: str) -> Tuple[bool, str]:
    try:
        verify_partial_integral(system, parse_candidate(system.table, text))
    except VerificationError as err:
        return True, err.reason.value
    return False, "verified although it should not"


def _split_target(text: str, table: VarTable) -> Tuple[str, Target]:
    body, _, target = text.partition("=>")
    if not target.strip():
        return body, Target.first_integral()
    return body, parse_target(target, table)[0]


def _check_integral(system: SystemDef, text: str) -> Tuple[bool, str]:
    body, target = _split_target(text, system.table)
    expr = parse_integral(system.table, body, target)
    return verify_integral_expr(system, expr), str(expr)


def _check_not_integral(system: SystemDef, text: str) -> Tuple[bool, str]:
    passed, rendered = _check_integral(system, text)
    return not passed, rendered


def _proportional(a: Sequence[Scalar], b: Sequence[Scalar]) -> bool:
    pivot = next((i for i, v in enumerate(b) if v), None)
    if pivot is None or not a[pivot]:
        return False
    ratio = a[pivot] / b[pivot]
    return all(x == y * ratio for x, y in zip(a, b))


def _check_combine(system: SystemDef, text: str) -> Tuple[bool, str]:
    """"TARGET: CAND; CAND => g1, g2" with the expected exponents optional"""
    match = _CANDIDATE_START.search(text)
    if match is None:
        raise ValueError(f"no candidate after the target in {text!r}")
    head, rest = text[: match.start()], text[match.end() :]
    target, with_time = parse_target(head, system.table)
    body, _, expected = rest.partition("=>")
    pis = [
        parse_candidate(system.table, piece)
        for piece in body.split(";")
        if piece.strip()
    ]
    results = combine(system, pis, target, allow_time_completion=with_time)
    rendered = "; ".join(str(expr) for expr in results)
    if not expected.strip():
        return True, rendered
    if any(isinstance(pi, ComplexPI) for pi in pis):
        raise ValueError("expected exponents need real candidates")
    wanted = [
        parse_expr(piece.strip(), system.table).constant
        for piece in expected.split(",")
    ]
    for expr in results:
        exponents: Dict = dict(expr.factors)
        gamma = [exponents.get(pi, Scalar.coerce(0)) for pi in pis]
        if gamma == wanted or (target.rho == 0 and _proportional(gamma, wanted)):
            return True, rendered
    return False, f"no exponent vector matches {[str(w) for w in wanted]}: {rendered}"


def _check_search(system: SystemDef, text: str, cap: int) -> Tuple[bool, str]:
    degree, _, expected = text.partition("=>")
    found = search_planar(system, SearchConfig(int(degree), candidate_cap=cap))
    rendered = "; ".join(str(p) for p, _ in found) or "none"
    if expected.strip() == "none":
        return not found, rendered
    wanted = {
        parse_expr(piece.strip(), system.table).primitive()
        for piece in expected.split(";")
    }
    return {p.primitive() for p, _ in found} == wanted, rendered


def _check_inverse(system: SystemDef, text: str) -> Tuple[bool, str]:
    table = system.table
    kind, colon, body = text.partition(":")
    match kind.strip():
        case "multiple":
            result = inverse_from_multiple_pi(table, *parse_multiple(table, body))
        case "complex":
            u, v, U, V = parse_polys(table, body, 4)
            result = inverse_from_complex_pi(table, u, v, U, V)
        case _:
            rows = [parse_row(table, piece) for piece in text.split(";")]
            result = inverse_system(table, rows)
    if result.system is None:
        return False, f"column {result.column} leaves remainder {result.remainder}"
    rendered = ", ".join(str(X) for X in result.system.rhs)
    return result.system.rhs == system.rhs, rendered


def _check_jacobi(system: SystemDef, text: str) -> Tuple[bool, str]:
    matrix, _, case = text.partition("=>")
    result = jacobi_general_integral(parse_matrix(matrix))
    rendered = f"{result.case.value}: {result.general_integral}"
    return (not case.strip() or result.case.value == case.strip()), rendered


def _check_jacobi_integral(system: SystemDef, text: str) -> Tuple[bool, str]:
    """"MATRIX => FACTORS": the file's system is the Jacobi system of MATRIX and
    FACTORS is a first integral depending on one the builder produces"""
    matrix, _, body = text.partition("=>")
    result = jacobi_general_integral(parse_matrix(matrix))
    if result.model.system.rhs != system.rhs:
        return False, f"matrix builds {[str(X) for X in result.model.system.rhs]}"
    expr = parse_integral(system.table, body)
    if not verify_integral_expr(system, expr):
        return False, f"{expr} is not a first integral"
    produced = (
        [result.general_integral]
        if expr.time_factor.is_zero
        else result.nonautonomous
    )
    found = next((e for e in produced if dependent_integrals(expr, e)), None)
    if found is None:
        return False, f"{expr} is independent of {[str(e) for e in produced]}"
    return True, f"{expr} ~ {found}"


_CHECKS: Dict[str, Callable[[SystemDef, str], Tuple[bool, str]]] = {
    "verify": _check_verify,
    "reject": _check_reject,
    "integral": _check_integral,
    "not-integral": _check_not_integral,
    "combine": _check_combine,
    "inverse": _check_inverse,
    "jacobi": _check_jacobi,
    "jacobi-integral": _check_jacobi_integral,
}


def run_directive(
    system: SystemDef,
    directive: Directive,
    source: str = "<text>",
    cap: int = DEFAULT_CANDIDATE_CAP,
) -> DirectiveOutcome:
    try:
        if directive.kind == "search":
            passed, detail = _check_search(system, directive.text, cap)
        elif directive.kind in _CHECKS:
            passed, detail = _CHECKS[directive.kind](system, directive.text)
        else:
            passed, detail = False, f"unknown directive {directive.kind!r}"
    except (DarbouxError, ValueError) as err:
        passed, detail = False, f"{type(err).__name__}: {err}"
    outcome = DirectiveOutcome(
        source, directive.line, directive.kind, directive.text, passed, detail
    )
    logging.info(str(outcome))
    return outcome


def run_file(path: Path, cap: int = DEFAULT_CANDIDATE_CAP) -> List[DirectiveOutcome]:
    text = path.read_text()
    system = parse_system(text)
    return [
        run_directive(system, directive, path.name, cap)
        for directive in read_directives(text)
    ]


def run_corpus(
    paths: Optional[Sequence[Path]] = None,
    jobs: int = 1,
    cap: int = DEFAULT_CANDIDATE_CAP,
) -> List[DirectiveOutcome]:
    """Every directive of every file, in file order whatever the number of jobs"""
    paths = list(paths) if paths is not None else bundled_systems()
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        per_file = list(pool.map(lambda path: run_file(path, cap), paths))
    return [outcome for outcomes in per_file for outcome in outcomes]
