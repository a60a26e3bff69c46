import random
from fractions import Fraction

import pytest
import sympy

from darboux_integrals._linalg import (
    Matrix,
    det_poly,
    determinant,
    nullspace,
    rank,
    row_space_basis,
    solve_linear,
)
from darboux_integrals._scalar import Scalar


def test_nullspace_is_normalized_to_leading_one():
    solution = solve_linear(Matrix.from_rows([[1, 2]]), [0])
    assert solution.nullspace == [(1, Fraction(-1, 2))]
    assert solution.particular == (0, 0)
    assert solution.rank == 1


def test_inconsistent_system_has_no_particular_solution():
    A = Matrix.from_rows([[1, 1], [2, 2]])
    solution = solve_linear(A, [1, 3])
    assert solution.particular is None
    assert solution.rank == 1


def test_unique_solution():
    A = Matrix.from_rows([[2, 1], [1, 3]])
    solution = solve_linear(A, [3, 5])
    assert solution.particular == (Fraction(4, 5), Fraction(7, 5))
    assert solution.nullspace == []


def test_solution_over_quadratic_extension():
    root = Scalar(0, 1, 2)
    A = Matrix.from_rows([[1, root], [root, 3]])
    solution = solve_linear(A, [1, 0])
    assert solution.particular is not None
    assert A.apply(solution.particular) == (1, 0)


@pytest.mark.parametrize(
    "rows, det",
    [
        ([[2, 0, 1], [1, 3, 2], [1, 1, 2]], 6),
        ([[0, 1], [1, 0]], -1),
        ([[1, 2], [2, 4]], 0),
        ([[0, 0, 1], [0, 1, 0], [1, 0, 0]], -1),
    ],
)
def test_determinant(rows, det):
    assert determinant(Matrix.from_rows(rows)) == det


def test_determinant_of_polynomials(planar_table):
    x, y = planar_table.var("x"), planar_table.var("y")
    one = planar_table.const(1)
    assert det_poly([[x, y], [one, x]]) == x**2 - y
    zero = planar_table.zero()
    assert det_poly([[zero, x], [y, zero]]) == -(x * y)


def test_rank_and_row_space():
    A = Matrix.from_rows([[1, 2, 3], [2, 4, 6], [1, 0, 1]])
    assert rank(A) == 2
    basis = row_space_basis([A.row(i) for i in range(3)])
    assert basis == [(1, 0, 1), (0, 1, 1)]
    assert nullspace(A) == [(1, 1, -1)]


def test_shift_and_matmul():
    A = Matrix.from_rows([[1, 2], [3, 4]])
    assert A.shift(1) == Matrix.from_rows([[0, 2], [3, 3]])
    assert A @ Matrix.identity(2) == A


def test_ragged_rows():
    with pytest.raises(ValueError):
        Matrix.from_rows([[1, 2], [3]])


@pytest.mark.parametrize("seed", range(200))
def test_exact_elimination_matches_sympy(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 4)
    cols = rng.randint(1, 4)
    rows = [
        [Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(cols)]
        for _ in range(n)
    ]
    A = Matrix.from_rows(rows)
    reference = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in r] for r in rows])
    assert rank(A) == reference.rank()
    if n == cols:
        assert determinant(A) == Scalar.from_sympy(reference.det())
    x0 = [Fraction(rng.randint(-3, 3)) for _ in range(cols)]
    b = A.apply(x0)
    solution = solve_linear(A, b)
    assert solution.particular is not None
    assert A.apply(solution.particular) == b
    zero = tuple(Scalar.coerce(0) for _ in range(n))
    for vector in solution.nullspace:
        assert A.apply(vector) == zero
    assert len(solution.nullspace) == cols - solution.rank
