import random
from fractions import Fraction

import pytest

from darboux_integrals._poly import VarTable
from darboux_integrals._scalar import Scalar
from darboux_integrals._types import (
    CombineError,
    CombineFailure,
    FailureReason,
    ParseError,
    UnsupportedSystemError,
    VerificationError,
)
from darboux_integrals.builder import (
    IntegralKind,
    RiccatiAbelMode,
    Target,
    combine,
    darboux_capacity,
    independent_integrals,
    integral_residual,
    parse_factor,
    parse_integral,
    render_integral,
    riccati_abel_combine,
    verify_integral_expr,
)
from darboux_integrals.system import SystemDef, parse_system
from darboux_integrals.verify import (
    ComplexPI,
    ConditionalPI,
    ExpArctanPI,
    PolyPI,
    factor_cofactor,
    parse_candidate,
)
from fixtures.systems import random_fraction


def test_focus_integral_from_its_parts(linear_focus):
    parts = [
        PolyPI(linear_focus.poly("x^2 + y^2")),
        ExpArctanPI(linear_focus.poly("y"), linear_focus.poly("x")),
    ]
    (expr,) = combine(linear_focus, parts, Target.first_integral())
    assert expr.gamma == (-1, 2)
    assert expr.time_factor.is_zero
    assert str(expr) == "exp(2*arctan((y)/(x))) * (x^2 + y^2)^-1"


def test_complex_candidate_decomposes_into_its_parts(linear_focus):
    w = ComplexPI(linear_focus.poly("x"), linear_focus.poly("y"))
    (expr,) = combine(linear_focus, [w], Target.first_integral())
    assert expr.gamma == (-1, 2)
    assert isinstance(expr.factors[1][0], ExpArctanPI)


def test_time_completion(linear_focus):
    circle = PolyPI(linear_focus.poly("x^2 + y^2"))
    with pytest.raises(CombineError) as info:
        combine(linear_focus, [circle], Target.first_integral())
    assert info.value.reason is CombineFailure.TIME_RESIDUAL
    (expr,) = combine(
        linear_focus, [circle], Target.first_integral(), allow_time_completion=True
    )
    assert expr.time_factor == linear_focus.poly("2*t")
    assert render_integral(expr) == "(x^2 + y^2) * exp(-2*t)"


def test_exponential_factor_with_time(multiple_line):
    parts = [
        parse_candidate(multiple_line.table, "poly: 2 + 2*x + y"),
        parse_candidate(multiple_line.table, "expfrac: (x + y) / (2 + 2*x + y)"),
    ]
    (expr,) = combine(
        multiple_line, parts, Target.first_integral(), allow_time_completion=True
    )
    assert expr.gamma == (1,)
    assert str(expr) == "exp((x + y)/(2 + 2*x + y)) * exp(-t)"


def test_inconsistent_combination(multiple_line):
    line = PolyPI(multiple_line.poly("2 + 2*x + y"))
    with pytest.raises(CombineError) as info:
        combine(multiple_line, [line], Target.first_integral())
    assert info.value.reason is CombineFailure.INCONSISTENT
    with pytest.raises(ValueError):
        combine(multiple_line, [], Target.first_integral())


@pytest.mark.parametrize(
    "target, gamma",
    [(Target.last_multiplier(), -1), (Target.pseudo(1), 1), (Target.pseudo(3), 3)],
)
def test_multiplier_targets(two_multipliers, target, gamma):
    hyperbola = PolyPI(two_multipliers.poly("x^2 - y^2 + a"))
    (expr,) = combine(two_multipliers, [hyperbola], target)
    assert expr.gamma == (gamma,)
    assert expr.kind is target.kind


def test_inhomogeneous_combination_lists_every_solution(two_multipliers):
    parts = [
        PolyPI(two_multipliers.poly("x^2 - y^2 + a")),
        ConditionalPI(two_multipliers.poly("x - y")),
    ]
    exprs = combine(two_multipliers, parts, Target.last_multiplier())
    assert [e.gamma for e in exprs] == [(-1,), (2,)]
    assert all(verify_integral_expr(two_multipliers, e) for e in exprs)


def test_custom_target(linear_focus):
    circle = PolyPI(linear_focus.poly("x^2 + y^2"))
    target = Target.custom(linear_focus.poly("6"))
    (expr,) = combine(linear_focus, [circle], target)
    assert expr.gamma == (3,)
    assert expr.kind is IntegralKind.CUSTOM
    assert str(target) == "custom:6"


def test_target_names():
    assert str(Target.first_integral()) == "first-integral"
    assert str(Target.last_multiplier()) == "last-multiplier"
    assert str(Target.pseudo(Fraction(1, 2))) == "pseudo:1/2"
    assert Target.pseudo(-1).kind is IntegralKind.LAST_MULTIPLIER


@pytest.mark.parametrize("n, d, expected", [(2, 2, 3), (2, 3, 6), (3, 2, 4), (3, 3, 10)])
def test_capacity(n, d, expected):
    assert darboux_capacity(n, d) == expected


@pytest.mark.parametrize("d", range(1, 11))
def test_capacity_in_low_dimension(d):
    assert darboux_capacity(1, d) == d
    assert darboux_capacity(2, d) == d * (d + 1) // 2


def test_capacity_bounds():
    with pytest.raises(ValueError):
        darboux_capacity(0, 2)
    with pytest.raises(ValueError):
        darboux_capacity(2, 0)


def test_render_general_integral(multiple_line):
    expr = parse_integral(
        multiple_line.table,
        "poly: 2 + 2*x + y @ -2; poly: 12 + 8*x + 4*y + 4*x*y + 3*y^2 @ 1",
    )
    assert (
        render_integral(expr)
        == "(12 + 8*x + 4*y + 4*x*y + 3*y^2) * (2 + 2*x + y)^-2"
    )
    assert verify_integral_expr(multiple_line, expr)


def test_render_empty_expression(planar_table):
    assert render_integral(parse_integral(planar_table, "")) == "1"


def test_power_and_divide(linear_focus):
    expr = parse_integral(linear_focus.table, "poly: x^2 + y^2 @ 1; time: 2*t")
    squared = expr.power(2)
    assert squared.gamma == (2,)
    assert squared.time_factor == linear_focus.poly("4*t")
    assert verify_integral_expr(linear_focus, squared)
    quotient = squared.divide(expr)
    assert quotient.gamma == (2, -1)
    assert verify_integral_expr(linear_focus, quotient)
    half = expr.power(Fraction(1, 2))
    assert str(half) == "(x^2 + y^2)^(1/2) * exp(-t)"


def test_rejected_integral(linear_focus):
    expr = parse_integral(linear_focus.table, "poly: x^2 + y^2 @ 1; arctan: y / x @ 2")
    assert not verify_integral_expr(linear_focus, expr)
    assert integral_residual(linear_focus, expr) == linear_focus.poly("4")


def test_residual_names_the_failing_component(multiple_line):
    expr = parse_integral(multiple_line.table, "poly: x @ 1")
    with pytest.raises(VerificationError) as info:
        integral_residual(multiple_line, expr)
    assert info.value.reason is FailureReason.COMPONENT_NOT_PI


def test_independent_integrals(jacobi_system):
    autonomous = parse_integral(
        jacobi_system.table,
        "poly: x + y + 1 @ 4; poly: x - 1 @ -3; poly: x - 2*y + 1 @ -1",
    )
    timed = parse_integral(
        jacobi_system.table, "poly: x - 1 @ 1; poly: x + y + 1 @ -1; time: -t"
    )
    assert verify_integral_expr(jacobi_system, autonomous)
    assert verify_integral_expr(jacobi_system, timed)
    point = {"x": 2, "y": 3}
    assert independent_integrals([autonomous, timed], [point]) == 2
    assert independent_integrals([autonomous, autonomous.power(2)], [point]) == 1


def test_singular_points_are_skipped(jacobi_system):
    expr = parse_integral(jacobi_system.table, "poly: x - 1 @ 1")
    assert independent_integrals([expr], [{"x": 1, "y": 0}]) == 0
    assert independent_integrals([expr], [{"x": 1, "y": 0}, {"x": 2, "y": 0}]) == 1


def test_logistic_general_integral(logistic):
    parts = [PolyPI(logistic.poly("x")), PolyPI(logistic.poly("x - 1"))]
    report = riccati_abel_combine(logistic, parts, RiccatiAbelMode.GENERAL_INTEGRAL)
    assert report.determinant == logistic.poly("-1")
    assert report.cramer_ratios == [logistic.poly("0"), logistic.poly("0")]
    assert report.constant_ratios
    (expr,) = report.integrals
    assert expr.gamma == (-1, 1)
    assert expr.time_factor == logistic.poly("-t")
    assert report.diagnostics == []


def test_logistic_integrating_factor(logistic):
    parts = [PolyPI(logistic.poly("x")), PolyPI(logistic.poly("x - 1"))]
    report = riccati_abel_combine(logistic, parts, RiccatiAbelMode.INTEGRATING_FACTOR)
    assert report.cramer_ratios == [logistic.poly("-1"), logistic.poly("-1")]
    assert report.constant_ratios
    assert len(report.integrals) == 2


def test_square_equation():
    system = parse_system("vars x; system; x' = x^2")
    parts = [PolyPI(system.poly("x"))]
    report = riccati_abel_combine(system, parts, RiccatiAbelMode.GENERAL_INTEGRAL)
    assert report.integrals == []
    assert any("inconsistent" in line for line in report.diagnostics)
    report = riccati_abel_combine(system, parts, RiccatiAbelMode.INTEGRATING_FACTOR)
    assert [e.gamma for e in report.integrals] == [(-2,)]


def test_determinant_needs_a_square_matrix(logistic):
    report = riccati_abel_combine(
        logistic, [PolyPI(logistic.poly("x"))], RiccatiAbelMode.GENERAL_INTEGRAL
    )
    assert report.determinant is None
    assert report.diagnostics


def test_riccati_abel_needs_a_scalar_equation(linear_focus):
    with pytest.raises(UnsupportedSystemError):
        riccati_abel_combine(linear_focus, [], RiccatiAbelMode.GENERAL_INTEGRAL)


def test_parse_factor(planar_table):
    pi, gamma = parse_factor(planar_table, "poly: x + y")
    assert gamma == 1
    pi, gamma = parse_factor(planar_table, "arctan: y / x @ sqrt(6)")
    assert isinstance(pi, ExpArctanPI)
    assert gamma == Scalar.sqrt(6)
    assert parse_factor(planar_table, "poly: x @ -1/2")[1] == Fraction(-1, 2)


@pytest.mark.parametrize(
    "text",
    ["complex: x + i*y @ 1", "poly: x @ x", "poly: x @ 1 +", "x + y @ 1"],
)
def test_rejected_factors(planar_table, text):
    with pytest.raises(ParseError):
        parse_factor(planar_table, text)


def test_rejected_integral_text(planar_table):
    with pytest.raises(ParseError):
        parse_integral(planar_table, "poly: x @ 1; time: t +")


def _product_system(rng: random.Random):
    """A quadratic system with the invariant lines x - a and y - b"""
    table = VarTable.build(["x", "y"])
    x, y = table.var("x"), table.var("y")
    a, b = random_fraction(rng), random_fraction(rng)

    def linear():
        return (
            x * random_fraction(rng)
            + y * random_fraction(rng)
            + table.const(rng.choice([-3, -2, -1, 1, 2, 3]))
        )

    P, Q = linear(), linear()
    system = SystemDef(table, ((x - a) * P, (y - b) * Q))
    return system, x - a, y - b, P, Q


@pytest.mark.parametrize("seed", range(200))
def test_cofactors_add_over_products(seed):
    rng = random.Random(seed)
    system, l1, l2, P, Q = _product_system(rng)
    assert factor_cofactor(system, PolyPI(l1)) == P
    assert factor_cofactor(system, PolyPI(l2)) == Q
    assert factor_cofactor(system, PolyPI(l1 * l2)) == P + Q
    assert factor_cofactor(system, PolyPI(l1**2 * l2)) == P * 2 + Q


@pytest.mark.parametrize("seed", range(200))
def test_combination_ignores_constant_factors(seed):
    rng = random.Random(seed)
    table = VarTable.build(["x", "y"])
    x, y = table.var("x"), table.var("y")
    a, b = random_fraction(rng), random_fraction(rng)
    u = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 3))
    v = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 3))
    system = SystemDef(table, ((x - a) * u, (y - b) * v))
    c1 = Fraction(rng.choice([-2, -1, 1, 2, 5]), rng.randint(1, 4))
    c2 = Fraction(rng.choice([-2, -1, 1, 2, 5]), rng.randint(1, 4))
    (plain,) = combine(
        system, [PolyPI(x - a), PolyPI(y - b)], Target.first_integral()
    )
    (scaled,) = combine(
        system, [PolyPI((x - a) * c1), PolyPI((y - b) * c2)], Target.first_integral()
    )
    assert plain.gamma == scaled.gamma
    g1, g2 = plain.gamma
    assert g1 * u + g2 * v == 0
    assert g2.sign() == 1
