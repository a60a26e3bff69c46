# Closed-form integrals of the Jacobi system x' = l1 - x*l3, y' = l2 - y*l3 from the
# eigen-structure of its coefficient matrix
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, Sequence, Tuple

from ._eigen import EigenEntry, EigenStructure, eigen_3x3
from ._factor import poly_gcd
from ._linalg import Matrix, Vector
from ._poly import MultiPoly, VarTable
from ._scalar import Scalar, ScalarLike
from ._types import (
    DegenerateJacobiError,
    FailureReason,
    ParseError,
    VerificationError,
)
from .builder import IntegralExpr, Target, verify_integral_expr
from .system import SystemDef
from .verify import ExpArctanPI, ExpRationalPI, PartialIntegral, PolyPI, verify_poly_pi

__all__ = [
    "JacobiCase",
    "JacobiModel",
    "JacobiResult",
    "jacobi_build",
    "jacobi_general_integral",
    "jacobi_linear_pi",
    "jacobi_nonautonomous_integral",
    "jacobi_nonautonomous_integrals",
    "parse_matrix",
]


class JacobiCase(Enum):
    THREE_SIMPLE_REAL = "three-simple-real"
    REPEATED_SIMPLE = "repeated-simple"
    COMPLEX = "complex"
    DOUBLE_DIVISOR = "double-divisor"
    TRIPLE_DIVISOR = "triple-divisor"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class JacobiModel:
    """Coefficient matrix with rows (a1, a2, a3), (b1, b2, b3), (c1, c2, c3) and
    the linear forms l_i = a_i*x + b_i*y + c_i"""

    matrix: Matrix
    forms: Tuple[MultiPoly, MultiPoly, MultiPoly]
    system: SystemDef

    @property
    def table(self) -> VarTable:
        return self.system.table

    def linear(self, vector: Sequence[ScalarLike]) -> MultiPoly:
        """alpha*x + beta*y + gamma for the vector (alpha, beta, gamma)"""
        x, y = (self.table.var(name) for name in self.system.states)
        alpha, beta, gamma = (Scalar.coerce(v) for v in vector)
        return x * alpha + y * beta + gamma


@dataclass(frozen=True)
class JacobiResult:
    """Integrals of a Jacobi system.

    `case`: Which eigen-structure produced the integrals
    `general_integral`: An autonomous first integral
    `nonautonomous`: First integrals carrying a time factor, the first of them is
        the one usually quoted
    `singular_factors`: Nonconstant common factors of the right-hand sides"""

    case: JacobiCase
    model: JacobiModel
    eigen: EigenStructure
    general_integral: IntegralExpr
    nonautonomous: List[IntegralExpr]
    singular_factors: List[MultiPoly] = field(default_factory=list)

    @property
    def nonautonomous_integral(self) -> IntegralExpr:
        return self.nonautonomous[0]


def parse_matrix(text: str) -> Matrix:
    """Read "a1,a2,a3; b1,b2,b3; c1,c2,c3" with rational entries such as 1/2"""
    try:
        rows = [
            [Fraction(entry.strip()) for entry in row.split(",")]
            for row in text.split(";")
        ]
        return Matrix.from_rows(rows)
    except ValueError as err:
        raise ParseError(f"cannot read matrix {text!r}: {err}") from err


def jacobi_build(A: Matrix, states: Sequence[str] = ("x", "y")) -> Tuple[JacobiModel, SystemDef]:
    """The Jacobi system of a rational 3x3 matrix"""
    if A.rows != 3 or A.cols != 3:
        raise ValueError(f"expected a 3x3 matrix, got {A.rows}x{A.cols}")
    table = VarTable.build(states)
    x, y = (table.var(name) for name in states)
    forms = tuple(x * A[0, i] + y * A[1, i] + A[2, i] for i in range(3))
    X = forms[0] - x * forms[2]
    Y = forms[1] - y * forms[2]
    if X.is_zero and Y.is_zero:
        raise DegenerateJacobiError(f"matrix {A} is a multiple of the identity")
    if X.is_constant and Y.is_constant:
        # A = lambda*E plus c1, c2 in the last row: a constant field of degree 0
        raise DegenerateJacobiError(
            f"matrix {A} gives the constant field ({X}, {Y})"
        )
    system = SystemDef(table, (X, Y))
    return JacobiModel(A, forms, system), system  # type: ignore[arg-type]


def _singular_factors(system: SystemDef) -> List[MultiPoly]:
    common = poly_gcd(*system.rhs)
    return [] if common.is_constant else [common]


def jacobi_linear_pi(
    model: JacobiModel, value: ScalarLike, vector: Vector
) -> Tuple[MultiPoly, MultiPoly]:
    """The partial integral alpha*x + beta*y + gamma of an eigenvector, with
    cofactor value - l3"""
    value = Scalar.coerce(value)
    vector = tuple(Scalar.coerce(v) for v in vector)
    image = model.matrix.apply(vector)
    if image != tuple(v * value for v in vector) or not any(vector):
        raise VerificationError(
            FailureReason.NOT_AN_EIGENVECTOR,
            f"{[str(v) for v in vector]} is not an eigenvector for {value}",
        )
    p = model.linear(vector)
    M = model.table.const(value) - model.forms[2]
    assert verify_poly_pi(model.system, p).primary == M
    return p, M


def _normalized_exponents(gammas: Sequence[Scalar]) -> List[Scalar]:
    """Coprime integers with the same orientation when all exponents are
    rationally proportional, otherwise unchanged"""
    base = next(g for g in gammas if g)
    ratios = [g / base for g in gammas]
    if not all(r.is_rational for r in ratios):
        return list(gammas)
    scale = math.lcm(*(r.rational.denominator for r in ratios))
    integers = [int(r.rational * scale) for r in ratios]
    divisor = math.gcd(*integers)
    orientation = base.sign()
    return [Scalar.coerce(Fraction(orientation * k, divisor)) for k in integers]


def _expr(
    factors: Sequence[Tuple[PartialIntegral, Scalar]], table: VarTable, phi=None
) -> IntegralExpr:
    kept = tuple((pi, g) for pi, g in factors if g)
    return IntegralExpr(
        kept, phi if phi is not None else table.zero(), Target.first_integral()
    )


def _split_complex(model: JacobiModel, vector: Vector) -> Tuple[MultiPoly, MultiPoly]:
    """Real and imaginary parts of an eigenvector for a complex eigenvalue,
    scaled jointly so the real part is primitive with positive leading term"""
    pivot = next(i for i in (1, 0, 2) if vector[i])
    scaled = [v / vector[pivot] for v in vector]
    real = [v.real_imag()[0] for v in scaled]
    imag = [v.real_imag()[1] for v in scaled]
    u, v = model.linear(real), model.linear(imag)
    if u.is_rational:
        factor = Scalar.coerce(1 / u.content())
        if u.leading_term()[1].sign() < 0:
            factor = -factor
        u, v = u * factor, v * factor
    return u, v


def _real(entry: EigenEntry) -> bool:
    return (entry.value.radicand or 0) >= 0


def jacobi_nonautonomous_integrals(A: Matrix) -> List[IntegralExpr]:
    return jacobi_general_integral(A).nonautonomous


def jacobi_nonautonomous_integral(A: Matrix) -> IntegralExpr:
    return jacobi_general_integral(A).nonautonomous_integral


def jacobi_general_integral(A: Matrix) -> JacobiResult:
    """Dispatch on the elementary divisors of A to the closed-form integral"""
    model, system = jacobi_build(A)
    eigen = eigen_3x3(A)
    table = system.table
    t = table.var("t")
    entries = eigen.entries
    lines = [
        (entry.value, jacobi_linear_pi(model, entry.value, chain[0])[0])
        for entry in entries
        if _real(entry)
        for chain in entry.chains
    ]
    nonautonomous = []
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            (li, pi_), (lj, pj) = lines[i], lines[j]
            if li != lj:
                nonautonomous.append(
                    _expr(
                        [(PolyPI(pi_), Scalar.coerce(1)), (PolyPI(pj), Scalar.coerce(-1))],
                        table,
                        t * (li - lj),
                    )
                )
    longest = max(max(e.divisors) for e in entries)
    if eigen.has_complex:
        case = JacobiCase.COMPLEX
        pair = next(e for e in entries if not _real(e))
        real_entry = next(e for e in entries if _real(e))
        xi, zeta = pair.value.real_imag()
        u, v = _split_complex(model, pair.chains[0][0])
        p3 = model.linear(real_entry.chains[0][0])
        gammas = _normalized_exponents(
            [zeta, zeta * -2, (real_entry.value - xi) * 2]
        )
        general = _expr(
            [
                (PolyPI(u**2 + v**2), gammas[0]),
                (PolyPI(p3), gammas[1]),
                (ExpArctanPI(v, u), gammas[2]),
            ],
            table,
        )
        nonautonomous.append(
            _expr([(ExpArctanPI(v, u), Scalar.coerce(1))], table, t * zeta)
        )
    elif longest == 3:
        case = JacobiCase.TRIPLE_DIVISOR
        theta, first, second = entries[0].chains[0]
        p, q, r = (model.linear(w) for w in (theta, first, second))
        general = _expr(
            [(PolyPI(q**2 - p * r), Scalar.coerce(1)), (PolyPI(p), Scalar.coerce(-2))],
            table,
        )
        nonautonomous.append(
            _expr([(ExpRationalPI(q, p, 1), Scalar.coerce(1))], table, t)
        )
    elif longest == 2:
        case = JacobiCase.DOUBLE_DIVISOR
        double = next(e for e in entries if max(e.divisors) == 2)
        theta, first = double.chains[0]
        if len(double.chains) == 2:
            value3, vector3 = double.value, double.chains[1][0]
        else:
            other = next(e for e in entries if e is not double)
            value3, vector3 = other.value, other.chains[0][0]
        p, q = model.linear(theta), model.linear(first)
        general = _expr(
            [
                (PolyPI(p), Scalar.coerce(1)),
                (PolyPI(model.linear(vector3)), Scalar.coerce(-1)),
                (ExpRationalPI(q, p, 1), value3 - double.value),
            ],
            table,
        )
        nonautonomous.append(
            _expr([(ExpRationalPI(q, p, 1), Scalar.coerce(1))], table, t)
        )
    elif len(entries) == 3:
        case = JacobiCase.THREE_SIMPLE_REAL
        (l1, p1), (l2, p2), (l3, p3) = lines
        gammas = _normalized_exponents([l2 - l3, l3 - l1, l1 - l2])
        general = _expr(
            [(PolyPI(p), g) for p, g in zip((p1, p2, p3), gammas)], table
        )
    else:
        case = JacobiCase.REPEATED_SIMPLE
        double = next(e for e in entries if len(e.divisors) == 2)
        first, second = (model.linear(chain[0]) for chain in double.chains)
        general = _expr(
            [(PolyPI(second), Scalar.coerce(1)), (PolyPI(first), Scalar.coerce(-1))],
            table,
        )
    for expr in [general] + nonautonomous:
        assert verify_integral_expr(system, expr), f"{expr} is not a first integral"
    logging.info(f"Jacobi system of case {case.value}: {general}")
    return JacobiResult(
        case, model, eigen, general, nonautonomous, _singular_factors(system)
    )
