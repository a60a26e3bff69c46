# Sparse multivariate polynomials over exact scalars
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import (
    Callable,
    Dict,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import sympy

from ._scalar import Scalar, ScalarLike
from ._types import (
    TIME_NAME,
    NotDivisibleError,
    VariableTableError,
    VarName,
    VarRole,
)

__all__ = ["Exponents", "MultiPoly", "Variable", "VarTable", "PolyLike"]

Exponents = Tuple[int, ...]


@dataclass(frozen=True)
class Variable:
    """A named variable with its role"""

    name: VarName
    role: VarRole


@dataclass(frozen=True)
class VarTable:
    """Ordered variables shared by every polynomial of one computation.

    `variables`: state variables first, then the time variable (if any), then
        parameters. Exponent vectors follow this order, and the monomial order is
        graded by state degree, then lexicographic over states, then over the
        remaining variables."""

    variables: Tuple[Variable, ...]

    def __post_init__(self):
        rank = {VarRole.STATE: 0, VarRole.TIME: 1, VarRole.PARAMETER: 2}
        ranks = [rank[v.role] for v in self.variables]
        if ranks != sorted(ranks):
            raise VariableTableError("variables must be ordered states, time, params")
        if len(set(self.names)) != len(self.names):
            raise VariableTableError(f"duplicate variable in {self.names}")

    @classmethod
    def build(
        cls,
        states: Sequence[str],
        parameters: Sequence[str] = (),
        with_time: bool = True,
    ) -> "VarTable":
        variables = [Variable(VarName(name), VarRole.STATE) for name in states]
        if with_time:
            variables.append(Variable(TIME_NAME, VarRole.TIME))
        variables += [Variable(VarName(name), VarRole.PARAMETER) for name in parameters]
        return cls(tuple(variables))

    @cached_property
    def names(self) -> Tuple[VarName, ...]:
        return tuple(v.name for v in self.variables)

    @cached_property
    def states(self) -> Tuple[VarName, ...]:
        return tuple(v.name for v in self.variables if v.role == VarRole.STATE)

    @cached_property
    def parameters(self) -> Tuple[VarName, ...]:
        return tuple(v.name for v in self.variables if v.role == VarRole.PARAMETER)

    @property
    def has_time(self) -> bool:
        return TIME_NAME in self.names

    @property
    def n_states(self) -> int:
        return len(self.states)

    def __len__(self) -> int:
        return len(self.variables)

    def index(self, name: str) -> int:
        try:
            return self.names.index(VarName(name))
        except ValueError as err:
            raise VariableTableError(f"unknown variable '{name}'") from err

    def role(self, name: str) -> VarRole:
        return self.variables[self.index(name)].role

    def zero(self) -> "MultiPoly":
        return MultiPoly(self)

    def const(self, value: ScalarLike) -> "MultiPoly":
        return MultiPoly(self, {(0,) * len(self): value})

    def var(self, name: str) -> "MultiPoly":
        exps = [0] * len(self)
        exps[self.index(name)] = 1
        return MultiPoly(self, {tuple(exps): 1})

    def monomial(self, exps: Exponents, coefficient: ScalarLike = 1) -> "MultiPoly":
        return MultiPoly(self, {exps: coefficient})

    def without(self, names: Iterable[str]) -> "VarTable":
        dropped = set(names)
        return VarTable(tuple(v for v in self.variables if v.name not in dropped))

    def with_state(self, name: str) -> "VarTable":
        """A table with one more state variable appended after the existing states"""
        extra = Variable(VarName(name), VarRole.STATE)
        n = self.n_states
        return VarTable(self.variables[:n] + (extra,) + self.variables[n:])

    @cached_property
    def symbols(self) -> Tuple[sympy.Symbol, ...]:
        return tuple(sympy.Symbol(name) for name in self.names)


def _order_key(table: VarTable, exps: Exponents) -> Tuple:
    n = table.n_states
    return (sum(exps[:n]), exps[:n], exps[n:])


def _print_key(table: VarTable, exps: Exponents) -> Tuple:
    # Ascending state degree, x before y inside a degree, then time and parameters
    n = table.n_states
    return (sum(exps[:n]), tuple(-e for e in exps[:n]), exps[n:])


class MultiPoly:
    """A sparse polynomial: a map from exponent vectors to nonzero Scalars.

    Values are immutable; every arithmetic operation returns a new polynomial. Both
    operands of a binary operation must share the same VarTable."""

    __slots__ = ("_table", "_terms", "__weakref__")

    _table: VarTable
    _terms: Dict[Exponents, Scalar]

    def __init__(
        self,
        table: VarTable,
        terms: Union[Mapping[Exponents, ScalarLike], None] = None,
    ):
        clean: Dict[Exponents, Scalar] = {}
        for exps, coefficient in (terms or {}).items():
            if len(exps) != len(table) or any(e < 0 for e in exps):
                raise VariableTableError(f"bad exponent vector {exps} for {table.names}")
            value = Scalar.coerce(coefficient)
            if value:
                clean[tuple(exps)] = value
        self._table = table
        self._terms = clean

    @classmethod
    def _make(cls, table: VarTable, terms: Dict[Exponents, Scalar]) -> "MultiPoly":
        obj = cls.__new__(cls)
        obj._table = table
        obj._terms = {e: c for e, c in terms.items() if c}
        return obj

    @property
    def table(self) -> VarTable:
        return self._table

    def terms(self) -> List[Tuple[Exponents, Scalar]]:
        """Terms in canonical printing order"""
        return sorted(self._terms.items(), key=lambda t: _print_key(self._table, t[0]))

    def coefficient(self, exps: Exponents) -> Scalar:
        return self._terms.get(tuple(exps), Scalar.coerce(0))

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[Tuple[Exponents, Scalar]]:
        return iter(self.terms())

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return all(not any(exps) for exps in self._terms)

    @property
    def constant(self) -> Scalar:
        return self.coefficient((0,) * len(self._table))

    @property
    def is_rational(self) -> bool:
        return all(c.is_rational for c in self._terms.values())

    @property
    def radicand(self) -> Optional[int]:
        found = {c.radicand for c in self._terms.values()} - {None}
        assert len(found) <= 1, f"mixed radicands {found}"
        return found.pop() if found else None

    @property
    def deg_x(self) -> int:
        """Degree in the state variables only; -1 for the zero polynomial"""
        n = self._table.n_states
        return max((sum(exps[:n]) for exps in self._terms), default=-1)

    @property
    def total_degree(self) -> int:
        return max((sum(exps) for exps in self._terms), default=-1)

    def degree_in(self, name: str) -> int:
        i = self._table.index(name)
        return max((exps[i] for exps in self._terms), default=-1)

    def depends_on(self, name: str) -> bool:
        return self.degree_in(name) > 0

    def leading_term(self) -> Tuple[Exponents, Scalar]:
        if self.is_zero:
            raise ValueError("zero polynomial has no leading term")
        exps = max(self._terms, key=lambda e: _order_key(self._table, e))
        return exps, self._terms[exps]

    def _check(self, other: "MultiPoly") -> None:
        if other._table != self._table:
            raise VariableTableError(
                f"variable tables differ: {self._table.names} vs {other._table.names}"
            )

    def _lift(self, other: "PolyLike") -> "MultiPoly":
        if isinstance(other, MultiPoly):
            self._check(other)
            return other
        return self._table.const(other)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, MultiPoly):
            return self._table == other._table and self._terms == other._terms
        if isinstance(other, (int, Fraction, Scalar)):
            return self.is_constant and self.constant == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self._table, frozenset(self._terms.items())))

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly._make(self._table, {e: -c for e, c in self._terms.items()})

    def __add__(self, other: "PolyLike") -> "MultiPoly":
        if not isinstance(other, (MultiPoly, Scalar, int, Fraction)):
            return NotImplemented
        other = self._lift(other)
        terms = dict(self._terms)
        for exps, c in other._terms.items():
            terms[exps] = terms[exps] + c if exps in terms else c
        return MultiPoly._make(self._table, terms)

    __radd__ = __add__

    def __sub__(self, other: "PolyLike") -> "MultiPoly":
        if not isinstance(other, (MultiPoly, Scalar, int, Fraction)):
            return NotImplemented
        return self + (-self._lift(other))

    def __rsub__(self, other: "PolyLike") -> "MultiPoly":
        return self._lift(other) - self

    def __mul__(self, other: "PolyLike") -> "MultiPoly":
        if isinstance(other, (Scalar, int, Fraction)):
            s = Scalar.coerce(other)
            return MultiPoly._make(self._table, {e: c * s for e, c in self._terms.items()})
        if not isinstance(other, MultiPoly):
            return NotImplemented
        self._check(other)
        terms: Dict[Exponents, Scalar] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                terms[exps] = terms[exps] + c1 * c2 if exps in terms else c1 * c2
        return MultiPoly._make(self._table, terms)

    __rmul__ = __mul__

    def __truediv__(self, other: ScalarLike) -> "MultiPoly":
        """Division by a nonzero scalar; use exact_div for polynomial divisors"""
        if isinstance(other, MultiPoly):
            return self.exact_div(other)
        return self * Scalar.coerce(other).inverse()

    def __pow__(self, exponent: int) -> "MultiPoly":
        if exponent < 0:
            raise ValueError("negative powers are not polynomials")
        result = self._table.const(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def divmod(self, divisor: "MultiPoly") -> Tuple["MultiPoly", "MultiPoly"]:
        """Division with remainder by the leading term of the divisor"""
        self._check(divisor)
        if divisor.is_zero:
            raise ZeroDivisionError("division by the zero polynomial")
        lead_exps, lead_coeff = divisor.leading_term()
        rest = [(e, c) for e, c in divisor._terms.items() if e != lead_exps]
        work = dict(self._terms)
        quotient: Dict[Exponents, Scalar] = {}
        remainder: Dict[Exponents, Scalar] = {}
        while work:
            exps = max(work, key=lambda e: _order_key(self._table, e))
            coeff = work.pop(exps)
            if all(a >= b for a, b in zip(exps, lead_exps)):
                q_exps = tuple(a - b for a, b in zip(exps, lead_exps))
                q_coeff = coeff / lead_coeff
                quotient[q_exps] = q_coeff
                for e, c in rest:
                    target = tuple(a + b for a, b in zip(e, q_exps))
                    value = work.get(target, Scalar.coerce(0)) - q_coeff * c
                    if value:
                        work[target] = value
                    else:
                        work.pop(target, None)
            else:
                remainder[exps] = coeff
        return (
            MultiPoly._make(self._table, quotient),
            MultiPoly._make(self._table, remainder),
        )

    def exact_div(self, divisor: "MultiPoly") -> "MultiPoly":
        """The quotient, or NotDivisibleError carrying the remainder"""
        quotient, remainder = self.divmod(divisor)
        if remainder:
            raise NotDivisibleError(remainder, f"{self} is not divisible by {divisor}")
        return quotient

    def divides(self, other: "MultiPoly") -> bool:
        return not other.divmod(self)[1]

    def derivative(self, name: str) -> "MultiPoly":
        i = self._table.index(name)
        terms: Dict[Exponents, Scalar] = {}
        for exps, c in self._terms.items():
            if exps[i]:
                lowered = exps[:i] + (exps[i] - 1,) + exps[i + 1 :]
                terms[lowered] = c * exps[i]
        return MultiPoly._make(self._table, terms)

    def homogeneous_part(self, degree: int) -> "MultiPoly":
        """Terms of the given state degree"""
        n = self._table.n_states
        return MultiPoly._make(
            self._table,
            {e: c for e, c in self._terms.items() if sum(e[:n]) == degree},
        )

    def filter_terms(self, keep: Callable[[Exponents], bool]) -> "MultiPoly":
        return MultiPoly._make(
            self._table, {e: c for e, c in self._terms.items() if keep(e)}
        )

    def map_coefficients(self, func: Callable[[Scalar], ScalarLike]) -> "MultiPoly":
        return MultiPoly(self._table, {e: func(c) for e, c in self._terms.items()})

    def real_imag(self) -> Tuple["MultiPoly", "MultiPoly"]:
        """Split coefficients of Q(sqrt(m)), m < 0, into real and imaginary parts"""
        parts = {e: c.real_imag() for e, c in self._terms.items()}
        return (
            MultiPoly(self._table, {e: p[0] for e, p in parts.items()}),
            MultiPoly(self._table, {e: p[1] for e, p in parts.items()}),
        )

    def reindex(self, table: VarTable) -> "MultiPoly":
        """The same polynomial over another table, matching variables by name"""
        positions = [table.index(name) for name in self._table.names]
        terms: Dict[Exponents, Scalar] = {}
        for exps, c in self._terms.items():
            new = [0] * len(table)
            for pos, e in zip(positions, exps):
                new[pos] = e
            terms[tuple(new)] = c
        return MultiPoly._make(table, terms)

    def substitute(
        self, values: Mapping[str, ScalarLike], table: Optional[VarTable] = None
    ) -> "MultiPoly":
        """Replace the named variables by scalars; the result lives on `table`,
        which defaults to this table without the substituted variables"""
        target = table or self._table.without(values)
        fixed = {self._table.index(n): Scalar.coerce(v) for n, v in values.items()}
        keep = [
            (i, target.index(name))
            for i, name in enumerate(self._table.names)
            if i not in fixed
        ]
        result: Dict[Exponents, Scalar] = {}
        for exps, c in self._terms.items():
            for i, value in fixed.items():
                c = c * value ** exps[i]
            if not c:
                continue
            new = [0] * len(target)
            for i, j in keep:
                new[j] = exps[i]
            key = tuple(new)
            result[key] = result[key] + c if key in result else c
        return MultiPoly._make(target, result)

    def evaluate(self, values: Mapping[str, ScalarLike]) -> Scalar:
        """Exact value at a point given for every variable that occurs"""
        missing = [
            n for n in self._table.names if self.depends_on(n) and n not in values
        ]
        if missing:
            raise VariableTableError(f"no value given for {missing}")
        return self.substitute(
            {n: v for n, v in values.items() if n in self._table.names}
        ).constant

    def content(self) -> Fraction:
        """Positive rational content of a polynomial with rational coefficients"""
        coefficients = [c.rational for c in self._terms.values()]
        if not coefficients:
            return Fraction(0)
        numerator = math.gcd(*(c.numerator for c in coefficients))
        denominator = math.lcm(*(c.denominator for c in coefficients))
        return Fraction(numerator, denominator)

    def primitive(self) -> "MultiPoly":
        """Scaled to coprime integer coefficients with a positive leading
        coefficient; polynomials with irrational coefficients are made monic"""
        if self.is_zero:
            return self
        _, lead = self.leading_term()
        if not self.is_rational:
            return self / lead
        scaled = self / self.content()
        return -scaled if lead.sign() < 0 else scaled

    def to_sympy(self):
        symbols = self._table.symbols
        expr = sympy.Integer(0)
        for exps, c in self._terms.items():
            term = c.to_sympy()
            for symbol, e in zip(symbols, exps):
                if e:
                    term *= symbol**e
            expr += term
        return expr

    @classmethod
    def from_sympy(cls, expr, table: VarTable) -> "MultiPoly":
        poly = sympy.Poly(sympy.expand(expr), *table.symbols)
        return cls(
            table,
            {
                tuple(int(e) for e in exps): Scalar.from_sympy(c)
                for exps, c in poly.as_dict(native=False).items()
            },
        )

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"MultiPoly({format_poly(self)!r})"


PolyLike = Union[MultiPoly, Scalar, int, Fraction]


def _format_monomial(table: VarTable, exps: Exponents) -> str:
    parts = []
    for name, e in zip(table.names, exps):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def _split_sign(c: Scalar) -> Tuple[bool, str]:
    """(negative, text of the magnitude) for a coefficient"""
    if c.is_rational:
        return c.rational < 0, str(abs(c.rational))
    if not c.a:
        negative = c.b < 0
        return negative, str(-c if negative else c)
    return False, f"({c})"


def format_poly(f: MultiPoly) -> str:
    """Canonical text of a polynomial, parseable by the system grammar.

    >>> t = VarTable.build(["x", "y"])
    >>> format_poly(t.var("x") * Fraction(1, 2) - t.var("y") ** 2 + 3)
    '3 + 1/2*x - y^2'
    """
    if f.is_zero:
        return "0"
    out = []
    for i, (exps, c) in enumerate(f.terms()):
        negative, magnitude = _split_sign(c)
        monomial = _format_monomial(f.table, exps)
        if not monomial:
            body = magnitude
        elif magnitude == "1":
            body = monomial
        else:
            body = f"{magnitude}*{monomial}"
        if i == 0:
            out.append(f"-{body}" if negative else body)
        else:
            out.append(f" - {body}" if negative else f" + {body}")
    return "".join(out)
