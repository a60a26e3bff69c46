from ._version import __version__
from .builder import (
    IntegralExpr,
    IntegralKind,
    RiccatiAbelMode,
    RiccatiAbelReport,
    Target,
    combine,
    darboux_capacity,
    dependent_integrals,
    independent_integrals,
    parse_integral,
    render_integral,
    riccati_abel_combine,
    target_for,
    verify_integral_expr,
)
from .inverse import (
    ExpRow,
    InverseResult,
    PolyRow,
    inverse_from_complex_pi,
    inverse_from_multiple_pi,
    inverse_system,
)
from .jacobi import (
    JacobiCase,
    JacobiResult,
    jacobi_build,
    jacobi_general_integral,
    jacobi_linear_pi,
    jacobi_nonautonomous_integral,
    jacobi_nonautonomous_integrals,
)
from .numeric import (
    IntegralEvaluator,
    Trajectory,
    check_conservation,
    check_cofactor_numeric,
    check_multiplier_numeric,
    integrate_rk4,
)
from .search import SearchConfig, search_planar
from .system import SystemDef, derive, divergence, parse_expr, parse_system
from .verify import (
    CofactorReport,
    ComplexPI,
    ConditionalPI,
    ExpArctanPI,
    ExpRationalPI,
    PolyPI,
    complex_exp_factor,
    multiplicity,
    parse_candidate,
    verify_complex_pi,
    verify_conditional_pi,
    verify_exp_arctan_pi,
    verify_exp_rational_pi,
    verify_partial_integral,
    verify_poly_pi,
)

__all__ = [
    "__version__",
    "CofactorReport",
    "ComplexPI",
    "ConditionalPI",
    "ExpArctanPI",
    "ExpRationalPI",
    "ExpRow",
    "IntegralEvaluator",
    "IntegralExpr",
    "IntegralKind",
    "InverseResult",
    "JacobiCase",
    "JacobiResult",
    "PolyPI",
    "PolyRow",
    "RiccatiAbelMode",
    "RiccatiAbelReport",
    "SearchConfig",
    "SystemDef",
    "Target",
    "Trajectory",
    "check_cofactor_numeric",
    "check_conservation",
    "check_multiplier_numeric",
    "combine",
    "complex_exp_factor",
    "darboux_capacity",
    "dependent_integrals",
    "derive",
    "divergence",
    "independent_integrals",
    "integrate_rk4",
    "inverse_from_complex_pi",
    "inverse_from_multiple_pi",
    "inverse_system",
    "jacobi_build",
    "jacobi_general_integral",
    "jacobi_linear_pi",
    "jacobi_nonautonomous_integral",
    "jacobi_nonautonomous_integrals",
    "multiplicity",
    "parse_candidate",
    "parse_expr",
    "parse_integral",
    "parse_system",
    "render_integral",
    "riccati_abel_combine",
    "search_planar",
    "target_for",
    "verify_complex_pi",
    "verify_conditional_pi",
    "verify_exp_arctan_pi",
    "verify_exp_rational_pi",
    "verify_integral_expr",
    "verify_partial_integral",
    "verify_poly_pi",
]
