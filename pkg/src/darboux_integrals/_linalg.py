# Exact linear algebra over Scalars: fraction-free elimination, RREF, determinants
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from ._poly import MultiPoly
from ._scalar import Scalar, ScalarLike

__all__ = [
    "LinearSolution",
    "Matrix",
    "Vector",
    "det_poly",
    "determinant",
    "nullspace",
    "rank",
    "row_space_basis",
    "solve_linear",
]

Vector = Tuple[Scalar, ...]


@dataclass(frozen=True)
class Matrix:
    """A dense matrix stored row-major.

    `rows`: Number of rows
    `cols`: Number of columns
    `entries`: rows*cols Scalars, row after row"""

    rows: int
    cols: int
    entries: Tuple[Scalar, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"{len(self.entries)} entries cannot fill a {self.rows}x{self.cols} "
                "matrix"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[ScalarLike]]) -> "Matrix":
        n_cols = len(rows[0]) if rows else 0
        if any(len(r) != n_cols for r in rows):
            raise ValueError("ragged rows")
        return cls(
            len(rows),
            n_cols,
            tuple(Scalar.coerce(v) for r in rows for v in r),
        )

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)])

    def __getitem__(self, index: Tuple[int, int]) -> Scalar:
        i, j = index
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Vector:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def column(self, j: int) -> Vector:
        return tuple(self[i, j] for i in range(self.rows))

    def to_lists(self) -> List[List[Scalar]]:
        return [list(self.row(i)) for i in range(self.rows)]

    @property
    def is_rational(self) -> bool:
        return all(v.is_rational for v in self.entries)

    def apply(self, vector: Sequence[ScalarLike]) -> Vector:
        if len(vector) != self.cols:
            raise ValueError("dimension mismatch")
        return tuple(
            sum((a * v for a, v in zip(self.row(i), vector)), Scalar.coerce(0))
            for i in range(self.rows)
        )

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        return Matrix.from_rows(
            [
                [
                    sum(
                        (self[i, k] * other[k, j] for k in range(self.cols)),
                        Scalar.coerce(0),
                    )
                    for j in range(other.cols)
                ]
                for i in range(self.rows)
            ]
        )

    def shift(self, value: ScalarLike) -> "Matrix":
        """A - value*E for a square matrix"""
        assert self.rows == self.cols
        rows = self.to_lists()
        for i in range(self.rows):
            rows[i][i] = rows[i][i] - value
        return Matrix.from_rows(rows)

    def __str__(self) -> str:
        return "; ".join(
            ", ".join(str(v) for v in self.row(i)) for i in range(self.rows)
        )


@dataclass(frozen=True)
class LinearSolution:
    """Result of solving A x = b exactly.

    `particular`: One solution with every free variable set to zero, or None when
        the system is inconsistent
    `nullspace`: Basis of the solutions of A x = 0, each scaled so that its first
        nonzero entry is 1
    `rank`: Rank of A"""

    particular: Optional[Vector]
    nullspace: List[Vector]
    rank: int


def _echelon(
    rows: List[List[Scalar]], n_cols: int
) -> Tuple[List[List[Scalar]], List[int], int]:
    """Bareiss fraction-free forward elimination on the first n_cols columns.

    Returns the reduced rows, the pivot columns and the number of row swaps."""
    rows = [list(r) for r in rows]
    width = len(rows[0]) if rows else 0
    pivots: List[int] = []
    swaps = 0
    previous = Scalar.coerce(1)
    r = 0
    for c in range(n_cols):
        found = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if found is None:
            continue
        if found != r:
            rows[r], rows[found] = rows[found], rows[r]
            swaps += 1
        pivot = rows[r][c]
        for i in range(r + 1, len(rows)):
            factor = rows[i][c]
            for j in range(c + 1, width):
                rows[i][j] = (pivot * rows[i][j] - factor * rows[r][j]) / previous
            rows[i][c] = Scalar.coerce(0)
        previous = pivot
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots, swaps


def _rref(
    rows: List[List[Scalar]], n_cols: int
) -> Tuple[List[List[Scalar]], List[int]]:
    rows, pivots, _ = _echelon(rows, n_cols)
    for r, c in reversed(list(enumerate(pivots))):
        pivot = rows[r][c]
        rows[r] = [v / pivot for v in rows[r]]
        for i in range(r):
            factor = rows[i][c]
            if factor:
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
    return rows, pivots


def _normalize_first(vector: Sequence[Scalar]) -> Vector:
    lead = next(v for v in vector if v)
    return tuple(v / lead for v in vector)


def solve_linear(A: Matrix, b: Optional[Sequence[ScalarLike]] = None) -> LinearSolution:
    """Solve A x = b exactly by reduction to row echelon form.

    >>> solution = solve_linear(Matrix.from_rows([[1, 2]]), [0])
    >>> [str(v) for v in solution.nullspace[0]]
    ['1', '-1/2']
    """
    rhs = [Scalar.coerce(v) for v in (b if b is not None else [0] * A.rows)]
    if len(rhs) != A.rows:
        raise ValueError("right-hand side length differs from the row count")
    augmented = [list(A.row(i)) + [rhs[i]] for i in range(A.rows)]
    if not augmented:
        return LinearSolution(
            tuple(Scalar.coerce(0) for _ in range(A.cols)),
            [_unit(A.cols, j) for j in range(A.cols)],
            0,
        )
    reduced, pivots = _rref(augmented, A.cols)
    rank = len(pivots)
    consistent = all(not row[-1] for row in reduced[rank:])
    particular: Optional[Vector] = None
    if consistent:
        values = [Scalar.coerce(0)] * A.cols
        for r, c in enumerate(pivots):
            values[c] = reduced[r][-1]
        particular = tuple(values)
    basis = []
    for free in (j for j in range(A.cols) if j not in pivots):
        vector = [Scalar.coerce(0)] * A.cols
        vector[free] = Scalar.coerce(1)
        for r, c in enumerate(pivots):
            vector[c] = -reduced[r][free]
        basis.append(_normalize_first(vector))
    return LinearSolution(particular, basis, rank)


def _unit(n: int, j: int) -> Vector:
    return tuple(Scalar.coerce(int(i == j)) for i in range(n))


def nullspace(A: Matrix) -> List[Vector]:
    return solve_linear(A).nullspace


def rank(A: Matrix) -> int:
    if A.rows == 0 or A.cols == 0:
        return 0
    return len(_echelon(A.to_lists(), A.cols)[1])


def row_space_basis(vectors: Sequence[Sequence[ScalarLike]]) -> List[Vector]:
    """The reduced row echelon basis of the span of the given vectors"""
    if not vectors:
        return []
    rows = [[Scalar.coerce(v) for v in vector] for vector in vectors]
    reduced, pivots = _rref(rows, len(rows[0]))
    return [tuple(row) for row in reduced[: len(pivots)]]


def determinant(A: Matrix) -> Scalar:
    """Exact determinant by fraction-free elimination"""
    if A.rows != A.cols:
        raise ValueError("determinant of a non-square matrix")
    if A.rows == 0:
        return Scalar.coerce(1)
    rows, pivots, swaps = _echelon(A.to_lists(), A.cols)
    if len(pivots) < A.rows:
        return Scalar.coerce(0)
    value = rows[-1][-1]
    return -value if swaps % 2 else value


def det_poly(entries: Sequence[Sequence[MultiPoly]]) -> MultiPoly:
    """Determinant of a square matrix of polynomials, by Bareiss elimination with
    exact polynomial division"""
    n = len(entries)
    if any(len(row) != n for row in entries):
        raise ValueError("determinant of a non-square matrix")
    table = entries[0][0].table
    rows = [list(row) for row in entries]
    previous = table.const(1)
    sign = 1
    for k in range(n - 1):
        found = next((i for i in range(k, n) if rows[i][k]), None)
        if found is None:
            return table.zero()
        if found != k:
            rows[k], rows[found] = rows[found], rows[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                rows[i][j] = (
                    rows[k][k] * rows[i][j] - rows[i][k] * rows[k][j]
                ).exact_div(previous)
        previous = rows[k][k]
    return rows[n - 1][n - 1] * sign
