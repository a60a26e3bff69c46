# Criteria for every kind of partial integral and extraction of their cofactors
import logging
import re
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple, Union

from ._factor import are_coprime
from ._linalg import Matrix, rank
from ._poly import MultiPoly, VarTable
from ._types import FailureReason, NotDivisibleError, ParseError, VerificationError
from .system import SystemDef, derive, parse_expr

__all__ = [
    "ComplexPI",
    "ConditionalPI",
    "CofactorReport",
    "ExpArctanPI",
    "ExpRationalPI",
    "PartialIntegral",
    "PIKind",
    "PolyPI",
    "complex_exp_factor",
    "factor_cofactor",
    "integral_manifold_check",
    "multiplicity",
    "parse_candidate",
    "verify_complex_pi",
    "verify_conditional_pi",
    "verify_exp_arctan_pi",
    "verify_exp_rational_pi",
    "verify_partial_integral",
    "verify_poly_pi",
]


class PIKind(Enum):
    POLY = "poly"  # p
    CONDITIONAL = "exp"  # exp(p)
    EXP_RATIONAL = "expfrac"  # exp(q / p^h)
    EXP_ARCTAN = "arctan"  # exp(arctan(v / u))
    COMPLEX = "complex"  # u + i*v


@dataclass(frozen=True)
class PolyPI:
    """A polynomial partial integral p"""

    p: MultiPoly
    kind = PIKind.POLY

    def __str__(self) -> str:
        return f"poly: {self.p}"


@dataclass(frozen=True)
class ConditionalPI:
    """A conditional partial integral exp(p)"""

    p: MultiPoly
    kind = PIKind.CONDITIONAL

    def __str__(self) -> str:
        return f"exp: {self.p}"


@dataclass(frozen=True)
class ExpRationalPI:
    """The exponential factor exp(q / p^h) of a multiple partial integral p.

    `q`: Numerator, coprime with p
    `p`: Polynomial partial integral
    `h`: Power of p in the denominator, at least 1"""

    q: MultiPoly
    p: MultiPoly
    h: int = 1
    kind = PIKind.EXP_RATIONAL

    def __post_init__(self):
        if self.h < 1:
            raise ValueError(f"exponent h must be at least 1, got {self.h}")

    def __str__(self) -> str:
        power = f" ^ {self.h}" if self.h != 1 else ""
        return f"expfrac: ({self.q}) / ({self.p}){power}"


@dataclass(frozen=True)
class ExpArctanPI:
    """The factor exp(arctan(v / u))"""

    v: MultiPoly
    u: MultiPoly
    kind = PIKind.EXP_ARCTAN

    def __str__(self) -> str:
        return f"arctan: ({self.v}) / ({self.u})"


@dataclass(frozen=True)
class ComplexPI:
    """A complex-valued partial integral w = u + i*v"""

    u: MultiPoly
    v: MultiPoly
    kind = PIKind.COMPLEX

    def __str__(self) -> str:
        return f"complex: ({self.u}) + i*({self.v})"


PartialIntegral = Union[PolyPI, ConditionalPI, ExpRationalPI, ExpArctanPI, ComplexPI]


@dataclass(frozen=True)
class CofactorReport:
    """Cofactors found for a verified partial integral.

    `primary`: M for polynomial, conditional and multiple kinds, U for the
        arctan and complex kinds
    `secondary`: N for an exponential factor exp(q/p^h), V for the arctan and
        complex kinds, otherwise None
    `degree_ok`: Every cofactor has state degree at most d - 1"""

    primary: MultiPoly
    secondary: Optional[MultiPoly] = None
    degree_ok: bool = True


def _quotient(f: MultiPoly, g: MultiPoly, what: str) -> MultiPoly:
    try:
        return f.exact_div(g)
    except NotDivisibleError as err:
        logging.debug(f"{what}: remainder {err.remainder}")
        raise VerificationError(
            FailureReason.NON_DIVISIBLE,
            f"{what}: {f} is not divisible by {g}",
            err.remainder,
        ) from err


def _check_degree(system: SystemDef, cofactor: MultiPoly, what: str) -> None:
    if cofactor.deg_x > system.d - 1:
        raise VerificationError(
            FailureReason.DEGREE,
            f"{what} {cofactor} has state degree {cofactor.deg_x} > {system.d - 1}",
            cofactor,
        )


def _check_coprime(f: MultiPoly, g: MultiPoly) -> None:
    if not are_coprime(f, g):
        raise VerificationError(
            FailureReason.NOT_COPRIME, f"{f} and {g} have a common factor"
        )


def verify_poly_pi(system: SystemDef, p: MultiPoly) -> CofactorReport:
    """Check that p divides its derivative along the flow, returning M"""
    if p.is_zero:
        raise ValueError("the zero polynomial is not a partial integral")
    M = _quotient(derive(system, p), p, "derivative of the candidate")
    _check_degree(system, M, "cofactor")
    return CofactorReport(M)


def verify_conditional_pi(system: SystemDef, p: MultiPoly) -> CofactorReport:
    if p.is_zero:
        raise ValueError("the zero polynomial is not a conditional partial integral")
    M = derive(system, p)
    _check_degree(system, M, "derivative")
    return CofactorReport(M)


def verify_exp_rational_pi(
    system: SystemDef, q: MultiPoly, p: MultiPoly, h: int = 1
) -> CofactorReport:
    """Check exp(q / p^h): p must be a polynomial partial integral with cofactor
    M and p^h must divide dq - h*q*M"""
    if h < 1:
        raise ValueError(f"exponent h must be at least 1, got {h}")
    _check_coprime(q, p)
    try:
        M = verify_poly_pi(system, p).primary
    except VerificationError as err:
        raise VerificationError(
            FailureReason.BASE_NOT_PI, f"{p} is not a partial integral", err.offending
        ) from err
    N = _quotient(derive(system, q) - q * M * h, p**h, "exponential factor")
    _check_degree(system, N, "cofactor")
    return CofactorReport(M, N)


def verify_exp_arctan_pi(
    system: SystemDef, v: MultiPoly, u: MultiPoly
) -> CofactorReport:
    """Solve du = u*U - v*V and dv = u*V + v*U for exp(arctan(v/u))"""
    if u.is_zero:
        raise ValueError("arctan factor needs a nonzero denominator")
    _check_coprime(u, v)
    du, dv = derive(system, u), derive(system, v)
    V = _quotient(u * dv - v * du, u**2 + v**2, "arctan numerator")
    U = _quotient(du + v * V, u, "arctan back-substitution")
    _check_degree(system, U, "cofactor U")
    _check_degree(system, V, "cofactor V")
    return CofactorReport(U, V)


def verify_complex_pi(system: SystemDef, u: MultiPoly, v: MultiPoly) -> CofactorReport:
    """Verify w = u + i*v by solving the real and imaginary identities directly,
    then cross-check against the pair (u^2 + v^2, exp(arctan(v/u)))"""
    _check_coprime(u, v)
    du, dv = derive(system, u), derive(system, v)
    modulus = u**2 + v**2
    U = _quotient(u * du + v * dv, modulus, "real part")
    V = _quotient(u * dv - v * du, modulus, "imaginary part")
    assert du == u * U - v * V and dv == u * V + v * U
    _check_degree(system, U, "cofactor U")
    _check_degree(system, V, "cofactor V")
    via_modulus = verify_poly_pi(system, modulus).primary / 2
    via_arctan = verify_exp_arctan_pi(system, v, u).secondary
    if (via_modulus, via_arctan) != (U, V):
        raise VerificationError(
            FailureReason.INCONSISTENT_ROUTES,
            f"direct ({U}, {V}) vs decomposed ({via_modulus}, {via_arctan})",
        )
    return CofactorReport(U, V)


def complex_exp_factor(
    system: SystemDef,
    u: MultiPoly,
    v: MultiPoly,
    h: int,
    z_re: MultiPoly,
    z_im: MultiPoly,
) -> Tuple[CofactorReport, CofactorReport]:
    """Exponential factors built from the real and imaginary parts of
    z * (u - i*v)^h over the partial integral u^2 + v^2"""
    verify_complex_pi(system, u, v)
    re, im = z_re, z_im
    for _ in range(h):
        re, im = re * u + im * v, im * u - re * v
    modulus = u**2 + v**2
    reports = []
    for part in (re, im):
        if part.is_zero:
            M = verify_poly_pi(system, modulus).primary
            reports.append(CofactorReport(M, part))
        else:
            reports.append(verify_exp_rational_pi(system, part, modulus, h))
    return reports[0], reports[1]


def multiplicity(
    system: SystemDef, p: MultiPoly, M: MultiPoly, h_max: int, deg_q_max: int
) -> List[Tuple[int, List[Tuple[MultiPoly, MultiPoly]]]]:
    """Independent exponential companions exp(q/p^h) of p for h = 1..h_max.

    Numerators divisible by p only repeat a lower power and are removed. An empty
    result means p is simple at these bounds."""
    from .search import search_exp_factor, unknown_monomials

    multiples = [
        p * p.table.monomial(e)
        for e in unknown_monomials(system, deg_q_max - p.total_degree)
    ]
    found = []
    for h in range(1, h_max + 1):
        basis = search_exp_factor(system, p, M, h, deg_q_max)
        exponents = sorted(
            {e for f in multiples + [q for q, _ in basis] for e, _ in f}
        )
        rows = [[f.coefficient(e) for e in exponents] for f in multiples]
        current = rank(Matrix.from_rows(rows)) if rows else 0
        kept = []
        for q, N in basis:
            rows.append([q.coefficient(e) for e in exponents])
            if rank(Matrix.from_rows(rows)) > current:
                current += 1
                kept.append((q, N))
            else:
                rows.pop()
        if kept:
            found.append((h, kept))
    logging.info(f"{p} has multiplicity {1 + sum(len(b) for _, b in found)}")
    return found


def integral_manifold_check(system: SystemDef, g: MultiPoly) -> bool:
    """Sufficient test that g = 0 is an integral manifold: g divides dg"""
    if g.is_zero:
        raise ValueError("the zero polynomial does not define a manifold")
    return g.divides(derive(system, g))


def verify_partial_integral(system: SystemDef, pi: PartialIntegral) -> CofactorReport:
    match pi:
        case PolyPI(p):
            return verify_poly_pi(system, p)
        case ConditionalPI(p):
            return verify_conditional_pi(system, p)
        case ExpRationalPI(q, p, h):
            return verify_exp_rational_pi(system, q, p, h)
        case ExpArctanPI(v, u):
            return verify_exp_arctan_pi(system, v, u)
        case ComplexPI(u, v):
            return verify_complex_pi(system, u, v)
        case _:
            raise TypeError(f"unknown partial integral {pi!r}")


def factor_cofactor(system: SystemDef, pi: PartialIntegral) -> MultiPoly:
    """The cofactor the factor contributes to a product of partial integrals"""
    if isinstance(pi, ComplexPI):
        raise ValueError("decompose a complex partial integral before combining")
    report = verify_partial_integral(system, pi)
    if isinstance(pi, (ExpRationalPI, ExpArctanPI)):
        assert report.secondary is not None
        return report.secondary
    return report.primary


def _split_fraction(text: str) -> Tuple[str, str]:
    depth = 0
    cuts = []
    for match in re.finditer(r"[()]|(?<!\d)/|/(?!\d)", text):
        token = match.group()
        if token == "(":
            depth += 1
        elif token == ")":
            depth -= 1
        elif depth == 0:
            cuts.append(match.start())
    if len(cuts) != 1:
        raise ParseError(f"expected exactly one '/' separator in {text!r}")
    return text[: cuts[0]], text[cuts[0] + 1 :]


def _split_power(text: str) -> Tuple[str, int]:
    match = re.fullmatch(r"\s*\((.*)\)\s*\^\s*(\d+)\s*", text)
    if match is None:
        return text, 1
    inner = match.group(1)
    depth = 0
    for char in inner:
        depth += {"(": 1, ")": -1}.get(char, 0)
        if depth < 0:
            # The parentheses do not enclose the whole denominator
            return text, 1
    return inner, int(match.group(2))


def parse_candidate(table: VarTable, text: str) -> PartialIntegral:
    """Read "poly: P", "exp: P", "expfrac: Q / (P) ^ H", "arctan: V / U" or
    "complex: U + i*V".

    >>> table = VarTable.build(["x", "y"])
    >>> str(parse_candidate(table, "expfrac: x + y / (2 + 2*x + y)"))
    'expfrac: (x + y) / (2 + 2*x + y)'
    """
    prefix, colon, body = text.partition(":")
    if not colon:
        raise ParseError(f"candidate {text!r} has no 'kind:' prefix")
    kind = prefix.strip()
    match kind:
        case "poly":
            return PolyPI(parse_expr(body, table))
        case "exp":
            return ConditionalPI(parse_expr(body, table))
        case "expfrac":
            numerator, denominator = _split_fraction(body)
            denominator, h = _split_power(denominator)
            return ExpRationalPI(
                parse_expr(numerator, table), parse_expr(denominator, table), h
            )
        case "arctan":
            numerator, denominator = _split_fraction(body)
            return ExpArctanPI(
                parse_expr(numerator, table), parse_expr(denominator, table)
            )
        case "complex":
            if "i" in table.names:
                raise ParseError("'i' is a variable of the system")
            extended = table.with_state("i")
            w = parse_expr(body, extended)
            if w.degree_in("i") > 1:
                raise ParseError(f"{body.strip()!r} is not linear in i")
            u = w.substitute({"i": 0}, table)
            v = w.derivative("i").substitute({"i": 0}, table)
            return ComplexPI(u, v)
        case _:
            raise ParseError(f"unknown candidate kind {kind!r}")
