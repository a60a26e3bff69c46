# Exact eigen-structure of 3x3 rational matrices: eigenvalues, elementary divisors
# and generalised eigenvector chains
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple

from ._factor import factor_univariate
from ._linalg import Matrix, Vector, nullspace, rank, row_space_basis, solve_linear
from ._poly import VarTable
from ._scalar import Scalar
from ._types import IrreducibleCubicError

__all__ = ["EigenEntry", "EigenStructure", "eigen_3x3", "characteristic_roots"]


@dataclass(frozen=True)
class EigenEntry:
    """One eigenvalue of a 3x3 matrix.

    `value`: The eigenvalue, rational or in Q(sqrt(m))
    `divisors`: Degrees of its elementary divisors, largest first
    `chains`: One chain per divisor. A chain of length k lists the eigenvector
        and then the generalised vectors w1, w2 with (A - value*E) w1 = v and
        (A - value*E) w2 = 2*w1"""

    value: Scalar
    divisors: Tuple[int, ...]
    chains: Tuple[Tuple[Vector, ...], ...]

    @property
    def multiplicity(self) -> int:
        return sum(self.divisors)

    @property
    def eigenvectors(self) -> Tuple[Vector, ...]:
        return tuple(chain[0] for chain in self.chains)


@dataclass(frozen=True)
class EigenStructure:
    """All eigenvalues of a 3x3 matrix in a fixed order: rational roots ascending,
    then the roots of an irreducible quadratic factor with the positive square
    root first"""

    matrix: Matrix
    entries: Tuple[EigenEntry, ...]

    @property
    def is_scalar_matrix(self) -> bool:
        return len(self.entries) == 1 and self.entries[0].divisors == (1, 1, 1)

    @property
    def has_complex(self) -> bool:
        return any((e.value.radicand or 0) < 0 for e in self.entries)

    def check(self) -> None:
        """Assert the chain relations exactly"""
        assert sum(e.multiplicity for e in self.entries) == 3
        for entry in self.entries:
            shifted = self.matrix.shift(entry.value)
            for chain in entry.chains:
                zero = tuple(Scalar.coerce(0) for _ in range(3))
                assert shifted.apply(chain[0]) == zero
                for k in range(1, len(chain)):
                    expected = tuple(v * k for v in chain[k - 1])
                    assert shifted.apply(chain[k]) == expected


def _normalize(vector: Vector) -> Vector:
    lead = next(v for v in vector if v)
    return tuple(v / lead for v in vector)


def characteristic_roots(A: Matrix) -> List[Tuple[Scalar, int]]:
    """Roots of det(s*E - A) with their algebraic multiplicities"""
    assert A.rows == A.cols == 3 and A.is_rational
    a = [[A[i, j].rational for j in range(3)] for i in range(3)]
    trace = a[0][0] + a[1][1] + a[2][2]
    minors = (
        a[0][0] * a[1][1]
        - a[0][1] * a[1][0]
        + a[0][0] * a[2][2]
        - a[0][2] * a[2][0]
        + a[1][1] * a[2][2]
        - a[1][2] * a[2][1]
    )
    det = Fraction(0)
    for j in range(3):
        sign = -1 if j % 2 else 1
        rows = [[a[i][k] for k in range(3) if k != j] for i in (1, 2)]
        det += sign * a[0][j] * (rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0])
    table = VarTable.build(["s"], with_time=False)
    s = table.var("s")
    char = s**3 - s**2 * trace + s * minors - det
    rational: List[Tuple[Scalar, int]] = []
    quadratic: List[Tuple[Scalar, int]] = []
    for factor, multiplicity in factor_univariate(char).factors:
        c = [factor.coefficient((k,)).rational for k in range(factor.total_degree + 1)]
        if len(c) == 2:
            rational.append((Scalar.coerce(-c[0] / c[1]), multiplicity))
        elif len(c) == 3:
            root = Scalar.sqrt(c[1] ** 2 - 4 * c[2] * c[0])
            for sign in (1, -1):
                quadratic.append(((root * sign - c[1]) / (2 * c[2]), multiplicity))
        else:
            raise IrreducibleCubicError(
                f"characteristic polynomial {char} has no rational root"
            )
    rational.sort(key=lambda item: item[0].rational)
    return rational + quadratic


def _divisor_degrees(B: Matrix) -> Tuple[int, ...]:
    r1 = rank(B)
    B2 = B @ B
    r2 = rank(B2)
    r3 = rank(B2 @ B)
    blocks = 3 - r1
    at_least_two = r1 - r2
    at_least_three = r2 - r3
    return (
        (3,) * at_least_three
        + (2,) * (at_least_two - at_least_three)
        + (1,) * (blocks - at_least_two)
    )


def _solve_chain_step(B: Matrix, rhs: Vector) -> Vector:
    solution = solve_linear(B, rhs)
    assert solution.particular is not None, "generalised eigenvector missing"
    return solution.particular


def _chains(B: Matrix, divisors: Tuple[int, ...]) -> Tuple[Tuple[Vector, ...], ...]:
    kernel = row_space_basis(nullspace(B))
    if divisors[0] == 1:
        return tuple((v,) for v in kernel)
    zero = tuple(Scalar.coerce(0) for _ in range(3))
    if divisors[0] == 3:
        B2 = B @ B
        image = next(
            B2.column(j) for j in range(3) if B2.column(j) != zero
        )
        theta = _normalize(image)
        first = _solve_chain_step(B, theta)
        second = _solve_chain_step(B, tuple(v * 2 for v in first))
        return ((theta, first, second),)
    w = next(v for v in nullspace(B @ B) if B.apply(v) != zero)
    theta = _normalize(B.apply(w))
    chains: List[Tuple[Vector, ...]] = [(theta, _solve_chain_step(B, theta))]
    if len(divisors) == 2:
        other = next(v for v in kernel if len(row_space_basis([theta, v])) == 2)
        chains.append((other,))
    return tuple(chains)


def eigen_3x3(A: Matrix) -> EigenStructure:
    """Eigenvalues, elementary divisors and chains of a rational 3x3 matrix"""
    if A.rows != 3 or A.cols != 3:
        raise ValueError(f"expected a 3x3 matrix, got {A.rows}x{A.cols}")
    if not A.is_rational:
        raise ValueError("eigen-structure needs a rational matrix")
    entries = []
    for value, _ in characteristic_roots(A):
        B = A.shift(value)
        divisors = _divisor_degrees(B)
        entries.append(EigenEntry(value, divisors, _chains(B, divisors)))
        logging.debug(f"eigenvalue {value} with elementary divisors {divisors}")
    structure = EigenStructure(A, tuple(entries))
    structure.check()
    return structure
