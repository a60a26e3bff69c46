# Systems with prescribed partial integrals, built from Cramer determinants of the
# Jacobian of the prescribed functions
import logging
import re
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

from ._linalg import det_poly
from ._poly import MultiPoly, VarTable
from ._types import TIME_NAME, JacobianZeroError
from .system import SystemDef, derive, parse_expr

__all__ = [
    "ExpRow",
    "InverseResult",
    "PolyRow",
    "inverse_from_complex_pi",
    "inverse_from_multiple_pi",
    "inverse_system",
    "parse_multiple",
    "parse_polys",
    "parse_row",
]


@dataclass(frozen=True)
class PolyRow:
    """A polynomial partial integral `g` with cofactor `M`"""

    g: MultiPoly
    M: MultiPoly


@dataclass(frozen=True)
class ExpRow:
    """A conditional partial integral exp(`omega`) with cofactor `M`"""

    omega: MultiPoly
    M: MultiPoly


Row = Union[PolyRow, ExpRow]


@dataclass(frozen=True)
class InverseResult:
    """Outcome of a construction.

    `system`: The constructed system, None when a determinant is not divisible
    `remainder`: Remainder of the first non-divisible numerator determinant
    `column`: State index of that determinant"""

    system: Optional[SystemDef]
    remainder: Optional[MultiPoly] = None
    column: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.system is not None


def _time_derivative(f: MultiPoly) -> MultiPoly:
    return f.derivative(TIME_NAME) if f.table.has_time else f.table.zero()


def _cramer(
    table: VarTable, functions: Sequence[MultiPoly], images: Sequence[MultiPoly]
) -> InverseResult:
    """Solve sum_i df_j/dx_i * X_i = c_j for the X_i"""
    n = table.n_states
    if len(functions) != n:
        raise ValueError(f"{len(functions)} prescribed functions for {n} states")
    for f in list(functions) + list(images):
        if f.table != table:
            raise ValueError(f"{f} is not over {table.names}")
    jacobian = [[f.derivative(name) for name in table.states] for f in functions]
    delta = det_poly(jacobian)
    if delta.is_zero:
        raise JacobianZeroError(
            f"the Jacobian of {[str(f) for f in functions]} vanishes identically"
        )
    rhs = []
    for i in range(n):
        replaced = [row[:i] + [c] + row[i + 1 :] for row, c in zip(jacobian, images)]
        quotient, remainder = det_poly(replaced).divmod(delta)
        if remainder:
            logging.debug(f"column {i} leaves remainder {remainder} modulo {delta}")
            return InverseResult(None, remainder, i)
        rhs.append(quotient)
    return InverseResult(SystemDef(table, tuple(rhs)))


def inverse_system(table: VarTable, rows: Sequence[Row]) -> InverseResult:
    """The system admitting every row as a partial integral with its cofactor.

    Polynomial rows g contribute g*M - dg/dt, exponential rows M - domega/dt."""
    functions = [row.g if isinstance(row, PolyRow) else row.omega for row in rows]
    images = [
        row.g * row.M - _time_derivative(row.g)
        if isinstance(row, PolyRow)
        else row.M - _time_derivative(row.omega)
        for row in rows
    ]
    result = _cramer(table, functions, images)
    if result.system is not None:
        for row in rows:
            if isinstance(row, PolyRow):
                assert derive(result.system, row.g) == row.g * row.M, row
            else:
                assert derive(result.system, row.omega) == row.M, row
    return result


def inverse_from_multiple_pi(
    table: VarTable,
    p: MultiPoly,
    M: MultiPoly,
    h: int,
    q: MultiPoly,
    N: MultiPoly,
) -> InverseResult:
    """The planar system for which p has cofactor M and exp(q/p^h) has cofactor N"""
    if h < 1:
        raise ValueError(f"multiplicity exponent must be positive, got {h}")
    images = [
        p * M - _time_derivative(p),
        q * M * h + p**h * N - _time_derivative(q),
    ]
    result = _cramer(table, [p, q], images)
    if result.system is not None:
        assert derive(result.system, p) == p * M
        assert derive(result.system, q) == q * M * h + p**h * N
    return result


def inverse_from_complex_pi(
    table: VarTable, u: MultiPoly, v: MultiPoly, U: MultiPoly, V: MultiPoly
) -> InverseResult:
    """The planar system for which u + i*v has complex cofactor U + i*V"""
    if table.n_states == 2 and [u, v] == [table.var(name) for name in table.states]:
        x, y = u, v
        return InverseResult(SystemDef(table, (x * U - y * V, x * V + y * U)))
    images = [
        u * U - v * V - _time_derivative(u),
        u * V + v * U - _time_derivative(v),
    ]
    result = _cramer(table, [u, v], images)
    if result.system is not None:
        assert derive(result.system, u) == u * U - v * V
        assert derive(result.system, v) == u * V + v * U
    return result


_ROW = re.compile(r"\s*(poly|exp)\s*:(.*),\s*cofactor\s*:(.*)")


def parse_row(table: VarTable, text: str) -> Row:
    """Read "poly: G, cofactor: M" or "exp: OMEGA, cofactor: M"

    >>> table = VarTable.build(["x", "y"])
    >>> row = parse_row(table, "poly: x^2 + y^2, cofactor: 2")
    >>> str(row.M)
    '2'
    """
    match = _ROW.fullmatch(text)
    if match is None:
        raise ValueError(f"cannot read row {text!r}")
    kind, function, cofactor = match.groups()
    f = parse_expr(function.strip(), table)
    M = parse_expr(cofactor.strip(), table)
    return PolyRow(f, M) if kind == "poly" else ExpRow(f, M)


def parse_polys(table: VarTable, text: str, count: int) -> List[MultiPoly]:
    """Comma-separated polynomials"""
    pieces = [piece.strip() for piece in text.split(",")]
    if len(pieces) != count:
        raise ValueError(f"expected {count} comma-separated entries in {text!r}")
    return [parse_expr(piece, table) for piece in pieces]


def parse_multiple(
    table: VarTable, text: str
) -> Tuple[MultiPoly, MultiPoly, int, MultiPoly, MultiPoly]:
    """Read "p, M, h, q, N" """
    pieces = [piece.strip() for piece in text.split(",")]
    if len(pieces) != 5:
        raise ValueError(f"expected p,M,h,q,N in {text!r}")
    p, M, q, N = (parse_expr(pieces[i], table) for i in (0, 1, 3, 4))
    return p, M, int(pieces[2]), q, N
