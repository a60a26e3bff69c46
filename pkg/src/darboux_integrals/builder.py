# Assembly of first integrals, last multipliers and pseudomultipliers from the
# cofactors of verified partial integrals
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from ._linalg import Matrix, Vector, det_poly, rank, solve_linear
from ._poly import MultiPoly, VarTable
from ._scalar import Scalar, ScalarLike
from ._types import (
    TIME_NAME,
    CombineError,
    CombineFailure,
    FailureReason,
    NotDivisibleError,
    ParseError,
    RationalLike,
    UnsupportedSystemError,
    VerificationError,
)
from .system import SystemDef, divergence, parse_expr
from .verify import (
    ComplexPI,
    ConditionalPI,
    ExpArctanPI,
    ExpRationalPI,
    PartialIntegral,
    PolyPI,
    factor_cofactor,
    parse_candidate,
    verify_complex_pi,
)

__all__ = [
    "IntegralExpr",
    "IntegralKind",
    "RiccatiAbelMode",
    "RiccatiAbelReport",
    "Target",
    "combine",
    "darboux_capacity",
    "decompose",
    "dependent_integrals",
    "independent_integrals",
    "integral_residual",
    "parse_factor",
    "parse_integral",
    "render_integral",
    "riccati_abel_combine",
    "target_for",
    "verify_integral_expr",
]


class IntegralKind(Enum):
    FIRST_INTEGRAL = "first-integral"  # cofactor sum 0
    LAST_MULTIPLIER = "last-multiplier"  # cofactor sum -div
    PSEUDO = "pseudo"  # cofactor sum rho*div
    CUSTOM = "custom"  # any prescribed polynomial


@dataclass(frozen=True)
class Target:
    """The polynomial a cofactor combination must equal: rho*div, or an
    explicitly given polynomial when `poly` is set"""

    rho: Fraction = Fraction(0)
    poly: Optional[MultiPoly] = None

    @classmethod
    def first_integral(cls) -> "Target":
        return cls(Fraction(0))

    @classmethod
    def last_multiplier(cls) -> "Target":
        return cls(Fraction(-1))

    @classmethod
    def pseudo(cls, rho: RationalLike) -> "Target":
        return cls(Fraction(rho))

    @classmethod
    def custom(cls, poly: MultiPoly) -> "Target":
        return cls(Fraction(0), poly)

    @property
    def kind(self) -> IntegralKind:
        if self.poly is not None:
            return IntegralKind.CUSTOM
        if self.rho == 0:
            return IntegralKind.FIRST_INTEGRAL
        if self.rho == -1:
            return IntegralKind.LAST_MULTIPLIER
        return IntegralKind.PSEUDO

    def scaled(self, k: RationalLike) -> "Target":
        if self.poly is not None:
            return Target.custom(self.poly * Fraction(k))
        return Target(self.rho * k)

    def minus(self, other: "Target") -> "Target":
        if self.poly is not None or other.poly is not None:
            if self.poly is None or other.poly is None:
                raise ValueError("cannot subtract a custom target from a div target")
            return Target.custom(self.poly - other.poly)
        return Target(self.rho - other.rho)

    def __str__(self) -> str:
        match self.kind:
            case IntegralKind.PSEUDO:
                return f"pseudo:{self.rho}"
            case IntegralKind.CUSTOM:
                return f"custom:{self.poly}"
            case kind:
                return kind.value


def target_for(system: SystemDef, target: Target) -> MultiPoly:
    """The polynomial value of a target for this system"""
    if target.poly is not None:
        if target.poly.table != system.table:
            raise ValueError("custom target over another variable table")
        return target.poly
    return divergence(system) * target.rho


@dataclass(frozen=True)
class IntegralExpr:
    """A product of partial integrals raised to exponents, times exp(-Phi(t)).

    `factors`: (partial integral, exponent) pairs; complex partial integrals are
        decomposed before they get here
    `time_factor`: The antiderivative Phi, a polynomial in t and the parameters
    `target`: What the cofactor sum of the expression equals"""

    factors: Tuple[Tuple[PartialIntegral, Scalar], ...]
    time_factor: MultiPoly
    target: Target = field(default_factory=Target.first_integral)

    @property
    def kind(self) -> IntegralKind:
        return self.target.kind

    @property
    def table(self) -> VarTable:
        return self.time_factor.table

    @property
    def gamma(self) -> Tuple[Scalar, ...]:
        return tuple(g for _, g in self.factors)

    def power(self, k: RationalLike) -> "IntegralExpr":
        """The expression raised to a rational power"""
        return IntegralExpr(
            tuple((pi, g * Fraction(k)) for pi, g in self.factors),
            self.time_factor * Fraction(k),
            self.target.scaled(k),
        )

    def divide(self, other: "IntegralExpr") -> "IntegralExpr":
        return IntegralExpr(
            self.factors + tuple((pi, -g) for pi, g in other.factors),
            self.time_factor - other.time_factor,
            self.target.minus(other.target),
        )

    def __str__(self) -> str:
        return render_integral(self)


def decompose(system: SystemDef, pi: PartialIntegral) -> List[Tuple[PartialIntegral, MultiPoly]]:
    """Product factors of a partial integral with their cofactors; a complex one
    becomes the pair (u^2 + v^2, exp(arctan(v/u)))"""
    if isinstance(pi, ComplexPI):
        report = verify_complex_pi(system, pi.u, pi.v)
        assert report.secondary is not None
        return [
            (PolyPI(pi.u**2 + pi.v**2), report.primary * 2),
            (ExpArctanPI(pi.v, pi.u), report.secondary),
        ]
    return [(pi, factor_cofactor(system, pi))]


def _state_free(table: VarTable, exps) -> bool:
    return not any(exps[: table.n_states])


def _antiderivative(phi: MultiPoly) -> MultiPoly:
    """Integral in t with zero constant term"""
    table = phi.table
    if not phi:
        return phi
    i = table.index(TIME_NAME)
    terms = {}
    for exps, c in phi:
        raised = exps[:i] + (exps[i] + 1,) + exps[i + 1 :]
        terms[raised] = c / (exps[i] + 1)
    return MultiPoly(table, terms)


def integral_residual(
    system: SystemDef, expr: IntegralExpr, target: Optional[MultiPoly] = None
) -> MultiPoly:
    """Cofactor sum minus dPhi/dt minus the target; zero for a valid expression"""
    total = -expr.time_factor.derivative(TIME_NAME)
    for pi, g in expr.factors:
        try:
            total = total + factor_cofactor(system, pi) * g
        except VerificationError as err:
            raise VerificationError(
                FailureReason.COMPONENT_NOT_PI,
                f"factor {pi} does not verify ({err})",
                err.offending,
            ) from err
    goal = target if target is not None else target_for(system, expr.target)
    return total - goal


def verify_integral_expr(
    system: SystemDef, expr: IntegralExpr, target: Optional[MultiPoly] = None
) -> bool:
    """Exact check of the cofactor identity; the target defaults to the one the
    expression carries"""
    residual = integral_residual(system, expr, target)
    if residual:
        logging.debug(f"{expr} misses its target by {residual}")
    return residual.is_zero


def _clear_denominators(vector: Vector) -> Vector:
    """Coprime integers with a positive last nonzero entry"""
    if not all(v.is_rational for v in vector):
        last = next(v for v in reversed(vector) if v)
        return tuple(v / last for v in vector)
    values = [v.rational for v in vector]
    scale = math.lcm(*(v.denominator for v in values))
    numerators = [int(v * scale) for v in values]
    divisor = math.gcd(*numerators) or 1
    last = next(v for v in reversed(numerators) if v)
    if last < 0:
        divisor = -divisor
    return tuple(Scalar.coerce(Fraction(v, divisor)) for v in numerators)


def _combination_system(
    table: VarTable,
    cofactors: Sequence[MultiPoly],
    goal: MultiPoly,
    time_completion: bool,
) -> Tuple[Matrix, List[Scalar]]:
    monomials = sorted({e for f in list(cofactors) + [goal] for e, _ in f})
    if time_completion:
        monomials = [e for e in monomials if not _state_free(table, e)]
    if not monomials:
        return Matrix(0, len(cofactors), ()), []
    A = Matrix.from_rows([[f.coefficient(e) for f in cofactors] for e in monomials])
    return A, [goal.coefficient(e) for e in monomials]


def combine(
    system: SystemDef,
    pis: Sequence[PartialIntegral],
    target: Target,
    allow_time_completion: bool = False,
) -> List[IntegralExpr]:
    """Exponent vectors gamma with sum(gamma_j * cofactor_j) equal to the target.

    With time completion, the part of the sum that does not involve the state
    variables is moved into a factor exp(-Phi(t)). A homogeneous problem yields
    one expression per nullspace vector, an inhomogeneous one the particular
    solution followed by the particular solution plus each nullspace vector."""
    if not pis:
        raise ValueError("combine needs at least one partial integral")
    columns: List[Tuple[PartialIntegral, MultiPoly]] = []
    for pi in pis:
        columns += decompose(system, pi)
    cofactors = [c for _, c in columns]
    goal = target_for(system, target)
    A, b = _combination_system(system.table, cofactors, goal, allow_time_completion)
    solution = solve_linear(A, b)
    homogeneous = not any(b)
    if solution.particular is None or (homogeneous and not solution.nullspace):
        if not allow_time_completion:
            A2, b2 = _combination_system(system.table, cofactors, goal, True)
            completed = solve_linear(A2, b2)
            if completed.particular is not None and (any(b2) or completed.nullspace):
                raise CombineError(
                    CombineFailure.TIME_RESIDUAL,
                    "balanced only up to a function of t; allow time completion",
                )
        if solution.particular is None:
            raise CombineError(
                CombineFailure.INCONSISTENT,
                f"no combination of cofactors reaches {goal}",
            )
        raise CombineError(
            CombineFailure.INCONSISTENT, "only the trivial combination exists"
        )
    if homogeneous:
        vectors = [_clear_denominators(v) for v in solution.nullspace]
    else:
        particular = solution.particular
        vectors = [particular] + [
            tuple(a + c for a, c in zip(particular, v)) for v in solution.nullspace
        ]
    results = []
    for gamma in vectors:
        residual = sum(
            (c * g for c, g in zip(cofactors, gamma)), system.table.zero()
        ) - goal
        assert all(_state_free(system.table, e) for e, _ in residual)
        expr = IntegralExpr(
            tuple((pi, g) for (pi, _), g in zip(columns, gamma) if g),
            _antiderivative(residual),
            target,
        )
        assert verify_integral_expr(system, expr), f"{expr} failed its own check"
        results.append(expr)
    logging.info(f"combine found {len(results)} expressions for {target}")
    return results


def darboux_capacity(n: int, d: int) -> int:
    """Number of partial integrals that guarantee an integral: binom(n+d-1, n)"""
    if n < 1 or d < 1:
        raise ValueError(f"capacity needs n >= 1 and d >= 1, got n={n}, d={d}")
    return math.comb(n + d - 1, n)


def _format_exponent(g: Scalar) -> str:
    if g.is_rational and g.rational.denominator == 1:
        return f"^{g}"
    return f"^({g})"


def _exp_prefix(g: Scalar) -> str:
    if g == 1:
        return ""
    if g == -1:
        return "-"
    return f"{g}*" if g.is_rational else f"({g})*"


def _render_factor(pi: PartialIntegral, g: Scalar) -> str:
    match pi:
        case PolyPI(p):
            return f"({p})" if g == 1 else f"({p}){_format_exponent(g)}"
        case ConditionalPI(p):
            prefix = _exp_prefix(g)
            return f"exp({prefix}({p}))" if prefix else f"exp({p})"
        case ExpRationalPI(q, p, h):
            power = f"^{h}" if h != 1 else ""
            return f"exp({_exp_prefix(g)}({q})/({p}){power})"
        case ExpArctanPI(v, u):
            return f"exp({_exp_prefix(g)}arctan(({v})/({u})))"
        case _:
            raise TypeError(f"cannot render {pi!r} as a product factor")


def _sign(g: Scalar) -> int:
    real, _ = g.real_imag()
    return real.sign() if real else 1


def render_integral(expr: IntegralExpr) -> str:
    """Text form: positive powers first, then negative ones, then the time factor.

    >>> from ._poly import VarTable
    >>> table = VarTable.build(["x"])
    >>> render_integral(IntegralExpr((), table.zero()))
    '1'
    """
    ordered = sorted(
        expr.factors,
        key=lambda item: isinstance(item[0], PolyPI) and _sign(item[1]) < 0,
    )
    parts = [_render_factor(pi, g) for pi, g in ordered]
    if expr.time_factor:
        parts.append(f"exp({-expr.time_factor})")
    return " * ".join(parts) if parts else "1"


def _log_gradient(pi: PartialIntegral, point: Mapping[str, ScalarLike]) -> List[Scalar]:
    """Gradient of log(factor) with respect to the states at a point"""
    table = _factor_table(pi)

    def at(f: MultiPoly) -> Scalar:
        return f.evaluate(point)

    grads = []
    for name in table.states:
        match pi:
            case PolyPI(p):
                value = at(p.derivative(name)) / at(p)
            case ConditionalPI(p):
                value = at(p.derivative(name))
            case ExpRationalPI(q, p, h):
                base = at(p)
                value = at(q.derivative(name)) / base**h - at(q) * at(
                    p.derivative(name)
                ) * h / base ** (h + 1)
            case ExpArctanPI(v, u):
                value = (
                    at(u) * at(v.derivative(name)) - at(v) * at(u.derivative(name))
                ) / at(u**2 + v**2)
            case _:
                raise TypeError(f"no gradient for {pi!r}")
        grads.append(value)
    return grads


def _factor_table(pi: PartialIntegral) -> VarTable:
    match pi:
        case PolyPI(p) | ConditionalPI(p) | ExpRationalPI(_, p, _):
            return p.table
        case ExpArctanPI(_, u):
            return u.table
        case ComplexPI(u, _):
            return u.table
    raise TypeError(f"unknown partial integral {pi!r}")


def independent_integrals(
    exprs: Sequence[IntegralExpr],
    points: Sequence[Mapping[str, RationalLike]],
    with_time: bool = False,
) -> int:
    """Largest rank of the logarithmic gradients of the expressions over the given
    rational points; equal to len(exprs) certifies functional independence.
    With `with_time` the t-derivative of the time factor joins each gradient,
    taken at t = 0 unless the point gives t"""
    best = 0
    for point in points:
        values = {k: Fraction(v) for k, v in point.items()}
        try:
            rows = []
            for expr in exprs:
                row = [Scalar.coerce(0)] * expr.table.n_states
                for pi, g in expr.factors:
                    grads = _log_gradient(pi, values)
                    row = [r + g * v for r, v in zip(row, grads)]
                if with_time:
                    rate = expr.time_factor.derivative(TIME_NAME)
                    row.append(-rate.evaluate({TIME_NAME: Fraction(0), **values}))
                rows.append(row)
        except ZeroDivisionError:
            logging.debug(f"point {point} lies on a singular locus, skipped")
            continue
        best = max(best, rank(Matrix.from_rows(rows)))
    return best


# rational points off the invariant curves of the bundled planar examples
GENERIC_POINTS: Tuple[Dict[str, Fraction], ...] = (
    {"x": Fraction(1, 3), "y": Fraction(2, 7)},
    {"x": Fraction(-5, 11), "y": Fraction(3, 13)},
    {"x": Fraction(7, 5), "y": Fraction(-4, 9)},
)


def dependent_integrals(
    a: IntegralExpr,
    b: IntegralExpr,
    points: Sequence[Mapping[str, RationalLike]] = GENERIC_POINTS,
) -> bool:
    """True when b is a function of a: their gradients in the states and t are
    proportional at every regular point given"""
    return independent_integrals([a, b], points, with_time=True) == 1


class RiccatiAbelMode(Enum):
    GENERAL_INTEGRAL = "general-integral"
    INTEGRATING_FACTOR = "integrating-factor"


@dataclass(frozen=True)
class RiccatiAbelReport:
    """Outcome of combining partial integrals of a scalar equation.

    `determinant`: Functional determinant of the cofactor coefficients in the
        powers of x, when the matrix is square
    `cramer_ratios`: Delta_j / Delta when they are polynomials
    `constant_ratios`: Whether every Cramer ratio is a constant
    `integrals`: Expressions found by combine
    `diagnostics`: Why no integral was produced"""

    determinant: Optional[MultiPoly]
    cramer_ratios: Optional[List[MultiPoly]]
    constant_ratios: Optional[bool]
    integrals: List[IntegralExpr]
    diagnostics: List[str]


def riccati_abel_combine(
    system: SystemDef, pis: Sequence[PartialIntegral], mode: RiccatiAbelMode
) -> RiccatiAbelReport:
    """Combination for a scalar equation dx/dt = X(t, x) with the determinant test
    over the coefficients of the powers of x"""
    if system.n != 1:
        raise UnsupportedSystemError(
            f"a scalar equation is required, this system has {system.n} states"
        )
    x = system.states[0]
    target = (
        Target.first_integral()
        if mode is RiccatiAbelMode.GENERAL_INTEGRAL
        else Target.last_multiplier()
    )
    columns = [c for pi in pis for _, c in decompose(system, pi)]
    goal = target_for(system, target)
    powers = sorted({e[0] for f in columns + [goal] for e, _ in f})
    diagnostics: List[str] = []

    def row_entries(f: MultiPoly, power: int) -> MultiPoly:
        # Coefficient of x^power as a polynomial in t and the parameters
        kept = f.filter_terms(lambda e: e[0] == power)
        return kept.substitute({x: 1}, system.table)

    determinant = ratios = constant = None
    if len(powers) == len(columns) and columns:
        matrix = [[row_entries(c, k) for c in columns] for k in powers]
        determinant = det_poly(matrix)
        if determinant.is_zero:
            diagnostics.append("the functional determinant vanishes identically")
        else:
            ratios = []
            for j in range(len(columns)):
                replaced = [
                    row[:j] + [row_entries(goal, k)] + row[j + 1 :]
                    for row, k in zip(matrix, powers)
                ]
                try:
                    ratios.append(det_poly(replaced).exact_div(determinant))
                except NotDivisibleError:
                    diagnostics.append(f"Cramer ratio {j + 1} is not a polynomial")
                    ratios = None
                    break
            constant = ratios is not None and all(r.is_constant for r in ratios)
    else:
        diagnostics.append(
            f"{len(columns)} cofactors against {len(powers)} powers of {x}: "
            "no square determinant"
        )
    integrals: List[IntegralExpr] = []
    try:
        integrals = combine(system, pis, target, allow_time_completion=True)
    except CombineError as err:
        diagnostics.append(str(err))
    return RiccatiAbelReport(determinant, ratios, constant, integrals, diagnostics)


def parse_factor(table: VarTable, text: str) -> Tuple[PartialIntegral, Scalar]:
    """Read "CANDIDATE @ EXPONENT"; the exponent is a constant such as -2, 1/2
    or sqrt(6), and defaults to 1"""
    candidate, at, exponent = text.rpartition("@")
    if not at:
        candidate, exponent = text, "1"
    pi = parse_candidate(table, candidate)
    if isinstance(pi, ComplexPI):
        raise ParseError("complex candidates enter integrals through their parts")
    gamma = parse_expr(exponent.strip(), table)
    if not gamma.is_constant:
        raise ParseError(f"exponent {exponent.strip()!r} is not a constant")
    return pi, gamma.constant


def parse_integral(
    table: VarTable, text: str, target: Optional[Target] = None
) -> IntegralExpr:
    """Read factors separated by ';', optionally followed by "time: PHI" for the
    factor exp(-PHI).

    >>> table = VarTable.build(["x", "y"])
    >>> str(parse_integral(table, "poly: x^2 + y^2 @ 1; arctan: y / x @ -2"))
    '(x^2 + y^2) * exp(-2*arctan((y)/(x)))'
    """
    factors = []
    phi = table.zero()
    for piece in text.split(";"):
        if not piece.strip():
            continue
        key, colon, body = piece.partition(":")
        if colon and key.strip() == "time":
            phi = parse_expr(body.strip(), table)
        else:
            factors.append(parse_factor(table, piece))
    return IntegralExpr(tuple(factors), phi, target or Target.first_integral())
