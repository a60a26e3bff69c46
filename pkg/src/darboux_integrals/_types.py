# Shared exceptions, enums and small helper types for the darboux_integrals package
from enum import Enum
from fractions import Fraction
from typing import TYPE_CHECKING, NewType, Optional, Union

if TYPE_CHECKING:
    from ._poly import MultiPoly

# Anything accepted where an exact rational is expected
RationalLike = Union[int, Fraction]
# Variable names as they appear in system files, e.g. "x", "delta"
VarName = NewType("VarName", str)

# The time variable is reserved and always present in a system's variable table
TIME_NAME = VarName("t")

# Default for the planar search top-part enumeration
DEFAULT_CANDIDATE_CAP = 10_000


class VarRole(Enum):
    """The role of a variable in a polynomial's variable table"""

    STATE = "state"  # Differentiated by the system, counted by deg_x
    TIME = "time"  # The independent variable t
    PARAMETER = "parameter"  # Symbolic constant, zero time-derivative


class FailureReason(Enum):
    """Why a candidate failed to verify as a partial integral"""

    NON_DIVISIBLE = "non-divisible"
    DEGREE = "degree"
    BASE_NOT_PI = "base-not-pi"
    NOT_COPRIME = "not-coprime"
    INCONSISTENT_ROUTES = "inconsistent-routes"
    NOT_AN_EIGENVECTOR = "not-an-eigenvector"
    COMPONENT_NOT_PI = "component-not-pi"


class CombineFailure(Enum):
    """Why no cofactor combination exists"""

    #: No exponent vector balances the target
    INCONSISTENT = "inconsistent"
    #: Balanced only up to a residual in t, and time completion was not allowed
    TIME_RESIDUAL = "time-residual"


class DarbouxError(Exception):
    """Base class of every error raised by this package"""


class RadicandMismatchError(DarbouxError, ValueError):
    """Two scalars from different quadratic extensions were combined"""


class VariableTableError(DarbouxError, ValueError):
    """Polynomials over different variable tables, or an unknown variable name"""


class NotDivisibleError(DarbouxError):
    """An exact division left a nonzero remainder"""

    def __init__(self, remainder: "MultiPoly", message: Optional[str] = None):
        self.remainder = remainder
        super().__init__(message or f"not divisible, remainder {remainder}")


class ParseError(DarbouxError, ValueError):
    """Malformed system or expression text"""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class VerificationError(DarbouxError):
    """A candidate is not a partial integral of the system"""

    def __init__(
        self,
        reason: FailureReason,
        message: str,
        offending: Optional["MultiPoly"] = None,
    ):
        self.reason = reason
        # The remainder for NON_DIVISIBLE, the too-large quotient for DEGREE
        self.offending = offending
        super().__init__(f"{reason.value}: {message}")


class UnsupportedSystemError(DarbouxError):
    """The requested operation does not cover this kind of system"""


class CandidateCapError(DarbouxError):
    """The planar search would need to try more top parts than allowed"""

    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(
            f"{count} top-part candidates exceed the cap of {cap}; raise it with "
            "--cap or DARBOUX_CANDIDATE_CAP"
        )


class CombineError(DarbouxError):
    """No linear combination of cofactors reaches the target"""

    def __init__(self, reason: CombineFailure, message: str):
        self.reason = reason
        super().__init__(f"{reason.value}: {message}")


class IrreducibleCubicError(DarbouxError):
    """The characteristic polynomial has no rational root"""


class DegenerateJacobiError(DarbouxError):
    """The coefficient matrix leaves X and Y constant: X = Y = 0 for a multiple
    of the identity, or a constant field of degree 0"""


class JacobianZeroError(DarbouxError):
    """The prescribed partial integrals are functionally dependent"""


class IntegrationError(DarbouxError):
    """The numerical integration produced a non-finite state"""

    def __init__(self, last_time: float):
        self.last_time = last_time
        super().__init__(f"non-finite state after t = {last_time}")


class SingularLocusError(DarbouxError):
    """A trajectory sample came too close to a base polynomial's zero set"""
