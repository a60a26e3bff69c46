# Exact scalars: rationals and elements a + b*sqrt(m) of a single quadratic extension
import math
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Tuple, Union

import sympy

from ._types import RadicandMismatchError, RationalLike

__all__ = ["Scalar", "ScalarLike", "squarefree_split"]


@lru_cache(maxsize=256)
def squarefree_split(n: int) -> Tuple[int, int]:
    """Write a nonzero integer as s**2 * m with m squarefree, keeping the sign in m.

    >>> squarefree_split(-24)
    (2, -6)
    """
    if n == 0:
        raise ValueError("zero has no squarefree part")
    square, free = 1, 1
    for prime, power in sympy.factorint(abs(n)).items():
        square *= prime ** (power // 2)
        if power % 2:
            free *= prime
    return square, free if n > 0 else -free


def _common_radicand(m1: Optional[int], m2: Optional[int]) -> Optional[int]:
    if m1 is None:
        return m2
    if m2 is None or m1 == m2:
        return m1
    raise RadicandMismatchError(f"cannot combine sqrt({m1}) with sqrt({m2})")


class Scalar:
    """An exact number a + b*sqrt(m) with a, b rational and m a squarefree integer.

    A purely rational scalar carries no radicand. Arithmetic between two scalars with
    different radicands raises RadicandMismatchError; all values are immutable."""

    __slots__ = ("_a", "_b", "_m")

    _a: Fraction
    _b: Fraction
    _m: Optional[int]

    def __init__(self, a: RationalLike = 0, b: RationalLike = 0, m: Optional[int] = None):
        a, b = Fraction(a), Fraction(b)
        if b and m is None:
            raise ValueError("an irrational part needs a radicand")
        if b:
            assert m is not None
            square, free = squarefree_split(m)
            if free == 1:
                a, b, m = a + b * square, Fraction(0), None
            else:
                b, m = b * square, free
        self._set(a, b, m)

    def _set(self, a: Fraction, b: Fraction, m: Optional[int]) -> None:
        self._a = a
        self._b = b
        self._m = m if b else None

    @classmethod
    def _make(cls, a: Fraction, b: Fraction, m: Optional[int]) -> "Scalar":
        # Trusted constructor, m already squarefree
        obj = cls.__new__(cls)
        obj._set(a, b, m)
        return obj

    @classmethod
    def coerce(cls, value: "ScalarLike") -> "Scalar":
        if isinstance(value, Scalar):
            return value
        if isinstance(value, (int, Fraction)):
            return cls._make(Fraction(value), Fraction(0), None)
        raise TypeError(f"cannot use {value!r} as an exact scalar")

    @classmethod
    def sqrt(cls, value: RationalLike) -> "Scalar":
        """Exact square root of a rational; negative input gives an imaginary value.

        >>> str(Scalar.sqrt(Fraction(-24, 4)))
        'sqrt(-6)'
        """
        value = Fraction(value)
        if value == 0:
            return cls.coerce(0)
        square, free = squarefree_split(value.numerator * value.denominator)
        coefficient = Fraction(square, value.denominator)
        if free == 1:
            return cls.coerce(coefficient)
        return cls._make(Fraction(0), coefficient, free)

    @classmethod
    def from_sympy(cls, value) -> "Scalar":
        """Convert a real sympy number of the form a + b*sqrt(m) back to a Scalar"""
        value = sympy.sympify(value)
        if value.is_Rational:
            return cls.coerce(Fraction(int(value.p), int(value.q)))
        rational, rest = value.as_independent(sympy.Pow, as_Add=True)
        coefficient, root = rest.as_independent(sympy.Pow, as_Add=False)
        if (
            not rational.is_Rational
            or not coefficient.is_Rational
            or not isinstance(root, sympy.Pow)
            or root.exp != sympy.Rational(1, 2)
            or not root.base.is_Integer
        ):
            raise ValueError(f"{value} is not in a quadratic extension of Q")
        return cls(
            Fraction(int(rational.p), int(rational.q)),
            Fraction(int(coefficient.p), int(coefficient.q)),
            int(root.base),
        )

    @property
    def a(self) -> Fraction:
        return self._a

    @property
    def b(self) -> Fraction:
        return self._b

    @property
    def radicand(self) -> Optional[int]:
        return self._m

    @property
    def is_rational(self) -> bool:
        return self._m is None

    @property
    def rational(self) -> Fraction:
        if self._m is not None:
            raise ValueError(f"{self} is not rational")
        return self._a

    def conjugate(self) -> "Scalar":
        """a - b*sqrt(m); complex conjugation when m < 0"""
        return Scalar._make(self._a, -self._b, self._m)

    def real_imag(self) -> Tuple["Scalar", "Scalar"]:
        """Split an element of Q(sqrt(m)), m < 0, into real and imaginary parts.

        The imaginary part b*sqrt(|m|) is re-tagged into Q(sqrt(|m|))."""
        if self._m is None or self._m > 0:
            return self, Scalar.coerce(0)
        return Scalar.coerce(self._a), Scalar(0, self._b, -self._m)

    def sign(self) -> int:
        """Sign of a real scalar, exactly"""
        if self._m is not None and self._m < 0:
            raise ValueError(f"{self} is not real")
        a_sign = (self._a > 0) - (self._a < 0)
        b_sign = (self._b > 0) - (self._b < 0)
        if a_sign == b_sign or b_sign == 0:
            return a_sign
        if a_sign == 0:
            return b_sign
        assert self._m is not None
        # Opposite signs: compare a^2 with b^2 m
        return a_sign if self._a**2 > self._b**2 * self._m else b_sign

    def denominator_lcm(self) -> int:
        return math.lcm(self._a.denominator, self._b.denominator)

    def to_sympy(self):
        value = sympy.Rational(self._a.numerator, self._a.denominator)
        if self._m is not None:
            b = sympy.Rational(self._b.numerator, self._b.denominator)
            value += b * sympy.sqrt(self._m)
        return value

    def __float__(self) -> float:
        if self._m is None:
            return float(self._a)
        if self._m < 0:
            raise ValueError(f"{self} is not real")
        return float(self._a) + float(self._b) * math.sqrt(self._m)

    def __bool__(self) -> bool:
        return bool(self._a) or bool(self._b)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return self._m is None and self._a == other
        if isinstance(other, Scalar):
            return (self._a, self._b, self._m) == (other._a, other._b, other._m)
        return NotImplemented

    def __hash__(self) -> int:
        if self._m is None:
            return hash(self._a)
        return hash((self._a, self._b, self._m))

    def __neg__(self) -> "Scalar":
        return Scalar._make(-self._a, -self._b, self._m)

    def __add__(self, other: "ScalarLike") -> "Scalar":
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        other = Scalar.coerce(other)
        m = _common_radicand(self._m, other._m)
        return Scalar._make(self._a + other._a, self._b + other._b, m)

    __radd__ = __add__

    def __sub__(self, other: "ScalarLike") -> "Scalar":
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        return self + (-Scalar.coerce(other))

    def __rsub__(self, other: "ScalarLike") -> "Scalar":
        return Scalar.coerce(other) - self

    def __mul__(self, other: "ScalarLike") -> "Scalar":
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        other = Scalar.coerce(other)
        m = _common_radicand(self._m, other._m)
        a = self._a * other._a
        if m is not None:
            a += self._b * other._b * m
        b = self._a * other._b + self._b * other._a
        return Scalar._make(a, b, m)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if not self:
            raise ZeroDivisionError("inverse of zero scalar")
        if self._m is None:
            return Scalar._make(1 / self._a, Fraction(0), None)
        norm = self._a**2 - self._b**2 * self._m
        return Scalar._make(self._a / norm, -self._b / norm, self._m)

    def __truediv__(self, other: "ScalarLike") -> "Scalar":
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        return self * Scalar.coerce(other).inverse()

    def __rtruediv__(self, other: "ScalarLike") -> "Scalar":
        return Scalar.coerce(other) * self.inverse()

    def __pow__(self, exponent: int) -> "Scalar":
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = Scalar.coerce(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __repr__(self) -> str:
        return f"Scalar({str(self)!r})"

    def __str__(self) -> str:
        if self._m is None:
            return str(self._a)
        if self._b == 1:
            root = f"sqrt({self._m})"
        elif self._b == -1:
            root = f"-sqrt({self._m})"
        else:
            root = f"{self._b}*sqrt({self._m})"
        if not self._a:
            return root
        if root.startswith("-"):
            return f"{self._a} - {root[1:]}"
        return f"{self._a} + {root}"


ScalarLike = Union[Scalar, int, Fraction]
