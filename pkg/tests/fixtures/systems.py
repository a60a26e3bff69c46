import random
from fractions import Fraction
from typing import Dict, List, Tuple

import pytest

from darboux_integrals._linalg import Matrix, determinant, solve_linear
from darboux_integrals._poly import MultiPoly, VarTable
from darboux_integrals.corpus import SYSTEMS_DIR
from darboux_integrals.system import SystemDef, parse_system


def bundled(name: str) -> SystemDef:
    return parse_system((SYSTEMS_DIR / name).read_text())


def random_fraction(rng: random.Random, size: int = 5) -> Fraction:
    return Fraction(rng.randint(-size, size), rng.randint(1, 3))


def random_poly(
    rng: random.Random, table: VarTable, degree: int, density: float = 0.6
) -> MultiPoly:
    """Random rational polynomial in the state variables of degree <= degree"""
    n = table.n_states
    terms = {}
    for exps in _state_exponents(n, degree):
        if rng.random() < density:
            terms[exps + (0,) * (len(table) - n)] = random_fraction(rng)
    return MultiPoly(table, terms)


def _state_exponents(n: int, degree: int) -> List[tuple]:
    if n == 0:
        return [()]
    found = []
    for first in range(degree + 1):
        for rest in _state_exponents(n - 1, degree - first):
            found.append((first,) + rest)
    return found


@pytest.fixture
def planar_table() -> VarTable:
    return VarTable.build(["x", "y"])


@pytest.fixture
def linear_focus() -> SystemDef:
    """x' = x - y, y' = x + y: spirals around a focus"""
    return bundled("linear_focus.sys")


@pytest.fixture
def three_dim() -> SystemDef:
    return bundled("three_dim.sys")


@pytest.fixture
def multiple_line() -> SystemDef:
    """Quadratic system whose invariant line 2 + 2x + y carries exp((x+y)/(2+2x+y))"""
    return bundled("multiple_line.sys")


@pytest.fixture
def two_multipliers() -> SystemDef:
    return bundled("two_multipliers.sys")


@pytest.fixture
def jacobi_system() -> SystemDef:
    return bundled("jacobi.sys")


@pytest.fixture
def logistic() -> SystemDef:
    """The scalar equation x' = x - x^2"""
    return parse_system("vars x; system; x' = x - x^2")


# Jordan shapes of a 3x3 matrix, keyed by the divisor degrees they produce
JORDAN_KINDS = ["simple", "repeated", "double", "block", "triple", "complex"]


def _invertible(rng: random.Random) -> Matrix:
    while True:
        P = Matrix.from_rows([[rng.randint(-2, 2) for _ in range(3)] for _ in range(3)])
        if determinant(P):
            return P


def _inverse(P: Matrix) -> Matrix:
    columns = []
    for j in range(3):
        unit = [int(i == j) for i in range(3)]
        solution = solve_linear(P, unit).particular
        assert solution is not None
        columns.append(solution)
    return Matrix.from_rows([[columns[j][i] for j in range(3)] for i in range(3)])


def constant_jacobi_field(A: Matrix) -> bool:
    """Whether A is lambda*E apart from the first two entries of its last row,
    which makes both right-hand sides of its Jacobi system constant"""
    off_diagonal = [(0, 1), (0, 2), (1, 0), (1, 2)]
    return all(A[i, j] == 0 for i, j in off_diagonal) and (
        A[0, 0] == A[1, 1] == A[2, 2]
    )


def random_jordan_matrix(
    rng: random.Random, kind: str
) -> Tuple[Matrix, Dict[Fraction, Tuple[int, ...]]]:
    """A rational matrix P*J*P^-1 with J of the given shape, and the expected
    divisor degrees per real eigenvalue; conjugates with a constant Jacobi field
    are drawn again"""
    l1, l2, l3 = rng.sample(range(-3, 4), 3)
    match kind:
        case "simple":
            J = [[l1, 0, 0], [0, l2, 0], [0, 0, l3]]
            expected = {l1: (1,), l2: (1,), l3: (1,)}
        case "repeated":
            J = [[l1, 0, 0], [0, l1, 0], [0, 0, l2]]
            expected = {l1: (1, 1), l2: (1,)}
        case "double":
            J = [[l1, 1, 0], [0, l1, 0], [0, 0, l2]]
            expected = {l1: (2,), l2: (1,)}
        case "block":
            J = [[l1, 1, 0], [0, l1, 0], [0, 0, l1]]
            expected = {l1: (2, 1)}
        case "triple":
            J = [[l1, 1, 0], [0, l1, 1], [0, 0, l1]]
            expected = {l1: (3,)}
        case "complex":
            b = rng.choice([-2, -1, 1, 2])
            J = [[l1, -b, 0], [b, l1, 0], [0, 0, l2]]
            expected = {l2: (1,)}
        case _:
            raise ValueError(kind)
    while True:
        P = _invertible(rng)
        A = P @ Matrix.from_rows(J) @ _inverse(P)
        if not constant_jacobi_field(A):
            return A, {Fraction(k): v for k, v in expected.items()}
