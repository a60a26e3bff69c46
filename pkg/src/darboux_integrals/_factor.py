# Factorisation and gcd of polynomials over Q, delegated to sympy
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple

import sympy

from ._poly import MultiPoly, VarTable

__all__ = ["Factorization", "factor_univariate", "poly_gcd", "are_coprime"]


@dataclass(frozen=True)
class Factorization:
    """`content` * product of factor**multiplicity equals the factored polynomial.

    `content`: Rational constant carrying sign and scale
    `factors`: (irreducible factor, multiplicity) pairs; each factor primitive
        with a positive leading coefficient, sorted by degree then printed form"""

    content: Fraction
    factors: List[Tuple[MultiPoly, int]]

    def expand(self, table: VarTable) -> MultiPoly:
        result = table.const(self.content)
        for factor, multiplicity in self.factors:
            result = result * factor**multiplicity
        return result


def _single_variable(f: MultiPoly) -> str:
    used = [name for name in f.table.names if f.depends_on(name)]
    if len(used) > 1:
        raise ValueError(f"{f} is not univariate, it uses {used}")
    return used[0] if used else f.table.names[0]


def factor_univariate(f: MultiPoly) -> Factorization:
    """Complete factorisation over Q of a polynomial in one variable.

    >>> t = VarTable.build(["s"], with_time=False)
    >>> s = t.var("s")
    >>> [str(p) for p, _ in factor_univariate(s**2 - 1).factors]
    ['-1 + s', '1 + s']
    """
    if f.is_zero:
        raise ValueError("cannot factor the zero polynomial")
    if not f.is_rational:
        raise ValueError(f"{f} has irrational coefficients")
    name = _single_variable(f)
    symbol = f.table.symbols[f.table.index(name)]
    _, pairs = sympy.Poly(f.to_sympy(), symbol, domain="QQ").factor_list()
    factors = [
        (MultiPoly.from_sympy(p.as_expr(), f.table).primitive(), int(k))
        for p, k in pairs
    ]
    factors.sort(key=lambda item: (item[0].total_degree, str(item[0])))
    product = f.table.const(1)
    for factor, multiplicity in factors:
        product = product * factor**multiplicity
    content = (f.leading_term()[1] / product.leading_term()[1]).rational
    logging.debug(f"factored {f} into {len(factors)} irreducible factors")
    return Factorization(content, factors)


def poly_gcd(f: MultiPoly, g: MultiPoly) -> MultiPoly:
    """Greatest common divisor, primitive with positive leading coefficient"""
    if f.table != g.table:
        raise ValueError("gcd of polynomials over different tables")
    if f.is_zero:
        return g.primitive()
    if g.is_zero:
        return f.primitive()
    symbols = f.table.symbols
    rational = f.is_rational and g.is_rational
    result = sympy.gcd(
        sympy.Poly(f.to_sympy(), *symbols),
        sympy.Poly(g.to_sympy(), *symbols),
        **({} if rational else {"extension": True}),
    )
    return MultiPoly.from_sympy(result.as_expr(), f.table).primitive()


def are_coprime(f: MultiPoly, g: MultiPoly) -> bool:
    return poly_gcd(f, g).is_constant
