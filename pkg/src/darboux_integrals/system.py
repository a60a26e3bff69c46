# Polynomial ODE systems: the text format, the derivation along the flow and the
# divergence
import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from ._poly import MultiPoly, VarTable, format_poly
from ._scalar import Scalar
from ._types import TIME_NAME, ParseError, RationalLike, VariableTableError

__all__ = [
    "SystemDef",
    "derive",
    "divergence",
    "format_system",
    "parse_expr",
    "parse_system",
    "print_poly",
]

_TOKEN = re.compile(
    r"(?P<space>\s+)|(?P<number>\d+)|(?P<name>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()'=])"
)
_KEYWORDS = {"vars", "param", "system", "sqrt"}


@dataclass(frozen=True)
class SystemDef:
    """The system dx_i/dt = X_i(t, x) with polynomial right-hand sides.

    `table`: Variables of every polynomial attached to this system
    `rhs`: One right-hand side per state variable, in table order"""

    table: VarTable
    rhs: Tuple[MultiPoly, ...]

    def __post_init__(self):
        if len(self.rhs) != self.table.n_states:
            raise VariableTableError(
                f"{len(self.rhs)} right-hand sides for {self.table.n_states} states"
            )
        for X in self.rhs:
            if X.table != self.table:
                raise VariableTableError(f"right-hand side {X} uses another table")

    @property
    def states(self) -> Tuple[str, ...]:
        return self.table.states

    @property
    def parameters(self) -> Tuple[str, ...]:
        return self.table.parameters

    @property
    def n(self) -> int:
        return self.table.n_states

    @property
    def d(self) -> int:
        """Maximal state degree of the right-hand sides"""
        return max([0] + [X.deg_x for X in self.rhs])

    @property
    def is_autonomous(self) -> bool:
        return not any(X.depends_on(TIME_NAME) for X in self.rhs)

    def X(self, name: str) -> MultiPoly:
        return self.rhs[self.states.index(name)]

    def poly(self, text: str) -> MultiPoly:
        """Parse an expression over this system's variables"""
        return parse_expr(text, self.table)

    def bind(self, values: Mapping[str, RationalLike]) -> "SystemDef":
        """Substitute rational values for parameters"""
        unknown = [n for n in values if n not in self.parameters]
        if unknown:
            raise VariableTableError(f"{unknown} are not parameters of the system")
        table = self.table.without(values)
        scalars = {n: Scalar.coerce(Fraction(v)) for n, v in values.items()}
        return SystemDef(
            table, tuple(X.substitute(scalars, table) for X in self.rhs)
        )

    def __str__(self) -> str:
        return format_system(self)


def derive(system: SystemDef, f: MultiPoly) -> MultiPoly:
    """The derivative of f along the flow: df/dt + sum of X_i * df/dx_i"""
    if f.table != system.table:
        raise VariableTableError(
            f"{f} lives on {f.table.names}, the system on {system.table.names}"
        )
    result = f.derivative(TIME_NAME) if system.table.has_time else f.table.zero()
    for name, X in zip(system.states, system.rhs):
        result = result + X * f.derivative(name)
    return result


def divergence(system: SystemDef) -> MultiPoly:
    result = system.table.zero()
    for name, X in zip(system.states, system.rhs):
        result = result + X.derivative(name)
    return result


print_poly = format_poly


def format_system(system: SystemDef) -> str:
    lines = ["vars " + " ".join(system.states)]
    if system.parameters:
        lines.append("param " + " ".join(system.parameters))
    lines.append("system")
    lines += [f"{name}' = {X}" for name, X in zip(system.states, system.rhs)]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    column: int


def _tokenize(text: str, line: int, column: int) -> List[_Token]:
    tokens = []
    position = 0
    while position < len(text):
        match = _TOKEN.match(text, position)
        if match is None:
            raise ParseError(
                f"unexpected character {text[position]!r}", line, column + position
            )
        kind = match.lastgroup
        assert kind is not None
        if kind != "space":
            tokens.append(_Token(kind, match.group(), column + position))
        position = match.end()
    return tokens


class _ExprParser:
    """Recursive descent over one statement's tokens"""

    def __init__(self, tokens: Sequence[_Token], table: VarTable, line: int):
        self.tokens = tokens
        self.table = table
        self.line = line
        self.position = 0

    def peek(self) -> Optional[_Token]:
        if self.position < len(self.tokens):
            return self.tokens[self.position]
        return None

    def error(self, message: str) -> ParseError:
        token = self.peek()
        if token is None:
            end = self.tokens[-1].column + len(self.tokens[-1].text) if self.tokens else 1
            return ParseError(message, self.line, end)
        return ParseError(message, self.line, token.column)

    def take(self, text: Optional[str] = None, kind: Optional[str] = None) -> _Token:
        token = self.peek()
        if token is None:
            raise self.error(f"expected {text or kind}, found end of input")
        if (text is not None and token.text != text) or (
            kind is not None and token.kind != kind
        ):
            raise self.error(f"expected {text or kind}, found {token.text!r}")
        self.position += 1
        return token

    def accept(self, text: str) -> bool:
        token = self.peek()
        if token is not None and token.text == text:
            self.position += 1
            return True
        return False

    def parse(self) -> MultiPoly:
        result = self.expr()
        if self.peek() is not None:
            raise self.error(f"unexpected {self.peek().text!r}")  # type: ignore
        return result

    def expr(self) -> MultiPoly:
        result = self.term()
        while True:
            if self.accept("+"):
                result = result + self.term()
            elif self.accept("-"):
                result = result - self.term()
            else:
                return result

    def term(self) -> MultiPoly:
        result = self.factor()
        while self.accept("*"):
            result = result * self.factor()
        token = self.peek()
        if token is not None and token.text == "/":
            raise self.error("'/' is only allowed inside a rational literal")
        if token is not None and token.kind in ("name", "number") or (
            token is not None and token.text == "("
        ):
            raise self.error("missing '*' before " + repr(token.text))
        return result

    def factor(self) -> MultiPoly:
        # A leading minus binds looser than '^' so that -x^2 reads as -(x^2)
        if self.accept("-"):
            return -self.factor()
        if self.accept("+"):
            return self.factor()
        base = self.base()
        if self.accept("^"):
            exponent = self.take(kind="number")
            return base ** int(exponent.text)
        return base

    def base(self) -> MultiPoly:
        token = self.peek()
        if token is None:
            raise self.error("expected an expression, found end of input")
        if token.kind == "number":
            self.position += 1
            value = Fraction(int(token.text))
            if self.accept("/"):
                denominator = int(self.take(kind="number").text)
                if denominator == 0:
                    raise ParseError("zero denominator", self.line, token.column)
                value /= denominator
            return self.table.const(value)
        if token.text == "(":
            self.position += 1
            inner = self.expr()
            self.take(")")
            return inner
        if token.kind == "name":
            self.position += 1
            if token.text == "sqrt":
                self.take("(")
                sign = -1 if self.accept("-") else 1
                radicand = sign * int(self.take(kind="number").text)
                self.take(")")
                return self.table.const(Scalar.sqrt(radicand))
            if token.text not in self.table.names:
                raise ParseError(
                    f"unknown identifier {token.text!r}", self.line, token.column
                )
            return self.table.var(token.text)
        raise self.error(f"unexpected {token.text!r}")


def parse_expr(text: str, table: VarTable, line: int = 1, column: int = 1) -> MultiPoly:
    """Parse a polynomial expression over the given variables.

    >>> table = VarTable.build(["x", "y"])
    >>> str(parse_expr("(x + y)*(x - y)", table))
    'x^2 - y^2'
    """
    tokens = _tokenize(text, line, column)
    if not tokens:
        raise ParseError("empty expression", line, column)
    return _ExprParser(tokens, table, line).parse()


def _statements(text: str):
    """(line, column, statement) triples with comments removed"""
    for line_no, raw in enumerate(text.splitlines(), start=1):
        code = raw.split("#", 1)[0]
        offset = 0
        for piece in code.split(";"):
            stripped = piece.lstrip()
            if stripped.strip():
                yield line_no, offset + len(piece) - len(stripped) + 1, stripped.rstrip()
            offset += len(piece) + 1


def _check_name(name: str, line: int, column: int, seen: Sequence[str]) -> None:
    if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", name):
        raise ParseError(f"invalid variable name {name!r}", line, column)
    if name == TIME_NAME or name in _KEYWORDS:
        raise ParseError(f"{name!r} is reserved", line, column)
    if name in seen:
        raise ParseError(f"duplicate variable {name!r}", line, column)


def parse_system(text: str) -> SystemDef:
    """Parse a system document.

    >>> system = parse_system("vars x y; system; x' = x - y; y' = x + y")
    >>> system.d
    1
    """
    states: List[str] = []
    parameters: List[str] = []
    pending: Dict[str, Tuple[int, int, str]] = {}
    for line, column, statement in _statements(text):
        keyword, _, rest = statement.partition(" ")
        if keyword in ("vars", "param"):
            if pending:
                raise ParseError(f"'{keyword}' after the first equation", line, column)
            for match in re.finditer(r"\S+", rest):
                name = match.group()
                name_column = column + len(keyword) + 1 + match.start()
                _check_name(name, line, name_column, states + parameters)
                (states if keyword == "vars" else parameters).append(name)
        elif statement == "system":
            continue
        else:
            match = re.fullmatch(r"([A-Za-z][A-Za-z0-9_]*)\s*'\s*=(.*)", statement)
            if match is None:
                raise ParseError(f"cannot read statement {statement!r}", line, column)
            name = match.group(1)
            if name not in states:
                raise ParseError(f"unknown state variable {name!r}", line, column)
            if name in pending:
                raise ParseError(f"second equation for {name!r}", line, column)
            pending[name] = (line, column + match.start(2), match.group(2))
    if not states:
        raise ParseError("no 'vars' declaration", 1, 1)
    missing = [name for name in states if name not in pending]
    if missing:
        raise ParseError(f"no equation for {missing}", 1, 1)
    table = VarTable.build(states, parameters)
    rhs = tuple(
        parse_expr(pending[name][2], table, pending[name][0], pending[name][1])
        for name in states
    )
    system = SystemDef(table, rhs)
    if system.d < 1:
        line, column, _ = pending[states[0]]
        raise ParseError("the right-hand sides must have state degree >= 1", line, 1)
    logging.debug(f"parsed system over {table.names} of degree {system.d}")
    return system
