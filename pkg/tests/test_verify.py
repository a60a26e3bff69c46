import random

import pytest

from darboux_integrals._poly import VarTable
from darboux_integrals._types import FailureReason, ParseError, VerificationError
from darboux_integrals.system import SystemDef
from darboux_integrals.verify import (
    ComplexPI,
    ExpArctanPI,
    ExpRationalPI,
    PIKind,
    PolyPI,
    complex_exp_factor,
    factor_cofactor,
    integral_manifold_check,
    multiplicity,
    parse_candidate,
    verify_complex_pi,
    verify_conditional_pi,
    verify_exp_arctan_pi,
    verify_exp_rational_pi,
    verify_partial_integral,
    verify_poly_pi,
)
from fixtures.systems import bundled, random_fraction, random_poly


def test_polynomial_partial_integral(three_dim):
    report = verify_poly_pi(three_dim, three_dim.poly("z"))
    assert report.primary == three_dim.poly("-2*x")
    assert report.secondary is None


def test_non_divisible_candidate_reports_remainder(three_dim):
    with pytest.raises(VerificationError) as info:
        verify_poly_pi(three_dim, three_dim.poly("y"))
    assert info.value.reason is FailureReason.NON_DIVISIBLE
    assert info.value.offending == three_dim.poly("z^2")


def test_conditional_partial_integral(three_dim):
    report = verify_conditional_pi(three_dim, three_dim.poly("x^2"))
    assert report.primary == three_dim.poly("2*x")


def test_conditional_degree_bound(linear_focus):
    with pytest.raises(VerificationError) as info:
        verify_conditional_pi(linear_focus, linear_focus.poly("x^3"))
    assert info.value.reason is FailureReason.DEGREE


def test_exponential_factor_of_multiple_line(multiple_line):
    report = verify_exp_rational_pi(
        multiple_line, multiple_line.poly("x + y"), multiple_line.poly("2 + 2*x + y")
    )
    assert report.primary == multiple_line.poly("x + y")
    assert report.secondary == 1


def test_exponential_factor_needs_coprime_numerator(multiple_line):
    p = multiple_line.poly("2 + 2*x + y")
    with pytest.raises(VerificationError) as info:
        verify_exp_rational_pi(multiple_line, p * 3, p)
    assert info.value.reason is FailureReason.NOT_COPRIME


def test_exponential_factor_needs_partial_integral_base(multiple_line):
    with pytest.raises(VerificationError) as info:
        verify_exp_rational_pi(multiple_line, multiple_line.poly("1"), multiple_line.poly("x"))
    assert info.value.reason is FailureReason.BASE_NOT_PI


def test_arctan_factor(linear_focus):
    report = verify_exp_arctan_pi(linear_focus, linear_focus.poly("y"), linear_focus.poly("x"))
    assert (report.primary, report.secondary) == (1, 1)


@pytest.mark.parametrize(
    "file, u, v, U, V",
    [
        ("linear_focus.sys", "x", "y", "1", "1"),
        ("complex_lines.sys", "x", "y", "1 + 2*y", "x - y"),
        ("arctan_quartic.sys", "x", "y^2", "y", "-2*y"),
        ("quadratic_focus.sys", "x", "y", "x - y", "x + y"),
    ],
)
def test_complex_partial_integrals(file, u, v, U, V):
    system = bundled(file)
    report = verify_complex_pi(system, system.poly(u), system.poly(v))
    assert report.primary == system.poly(U)
    assert report.secondary == system.poly(V)


def test_complex_candidate_that_is_not_integral(three_dim):
    with pytest.raises(VerificationError):
        verify_complex_pi(three_dim, three_dim.poly("x"), three_dim.poly("y"))


def test_complex_exponential_factors():
    system = bundled("complex_exp.sys")
    x, y = system.poly("x"), system.poly("y")
    real, imag = complex_exp_factor(system, x, y, 1, y, system.table.zero())
    assert (real.primary, real.secondary) == (
        system.poly("2 - 2*x^2"),
        system.poly("x^2 - y^2"),
    )
    assert (imag.primary, imag.secondary) == (
        system.poly("2 - 2*x^2"),
        system.poly("-2*x*y"),
    )


def test_multiplicity_of_invariant_line(multiple_line):
    p = multiple_line.poly("2 + 2*x + y")
    M = multiple_line.poly("x + y")
    found = multiplicity(multiple_line, p, M, 1, 1)
    assert [h for h, _ in found] == [1]
    ((q, N),) = found[0][1]
    assert verify_exp_rational_pi(multiple_line, q, p).secondary == N


def test_plane_carries_an_exponential_factor(three_dim):
    z = three_dim.poly("z")
    found = multiplicity(three_dim, z, three_dim.poly("-2*x"), 1, 1)
    ((h, ((q, N),)),) = found
    assert h == 1
    assert q.depends_on("y")
    assert verify_exp_rational_pi(three_dim, q, z).secondary == N


def test_simple_partial_integral_has_no_companion(linear_focus):
    r2 = linear_focus.poly("x^2 + y^2")
    assert multiplicity(linear_focus, r2, linear_focus.poly("2"), 1, 2) == []


def test_integral_manifold(three_dim):
    assert integral_manifold_check(three_dim, three_dim.poly("z"))
    assert not integral_manifold_check(three_dim, three_dim.poly("y"))


@pytest.mark.parametrize(
    "text, kind",
    [
        ("poly: z", PIKind.POLY),
        ("exp: x^2", PIKind.CONDITIONAL),
        ("expfrac: 1 / (x^2 + y^2) ^ 2", PIKind.EXP_RATIONAL),
        ("arctan: y / x", PIKind.EXP_ARCTAN),
        ("complex: x + i*y", PIKind.COMPLEX),
    ],
)
def test_parse_candidate_kinds(three_dim, text, kind):
    assert parse_candidate(three_dim.table, text).kind is kind


def test_parse_candidate_parts(planar_table):
    pi = parse_candidate(planar_table, "expfrac: (x - 1/2) / (x^2 + y^2)^3")
    assert isinstance(pi, ExpRationalPI)
    assert (str(pi.q), str(pi.p), pi.h) == ("-1/2 + x", "x^2 + y^2", 3)
    w = parse_candidate(planar_table, "complex: x - 2 + i*(y^2 - x)")
    assert isinstance(w, ComplexPI)
    assert (str(w.u), str(w.v)) == ("-2 + x", "-x + y^2")


@pytest.mark.parametrize(
    "text",
    [
        "x^2 + y^2",
        "circle: x^2 + y^2",
        "arctan: y",
        "expfrac: 1 / x / y",
        "complex: x + i^2*y",
    ],
)
def test_parse_candidate_errors(planar_table, text):
    with pytest.raises(ParseError):
        parse_candidate(planar_table, text)


def test_dispatch_and_factor_cofactor(linear_focus):
    table = linear_focus.table
    x, y = table.var("x"), table.var("y")
    assert verify_partial_integral(linear_focus, PolyPI(x**2 + y**2)).primary == 2
    assert factor_cofactor(linear_focus, ExpArctanPI(y, x)) == 1
    with pytest.raises(ValueError):
        factor_cofactor(linear_focus, ComplexPI(x, y))


def _shared_cofactor_system(rng: random.Random):
    """Two polynomials g1, g2 and a field along which both have cofactor k*J,
    J the Jacobian determinant of (g1, g2)"""
    table = VarTable.build(["x", "y"])
    while True:
        g1 = random_poly(rng, table, rng.randint(1, 2))
        g2 = random_poly(rng, table, rng.randint(1, 2))
        k = random_poly(rng, table, rng.randint(0, 1))
        J = g1.derivative("x") * g2.derivative("y")
        J -= g1.derivative("y") * g2.derivative("x")
        if not J.is_zero and not k.is_zero:
            break
    X = -k * (g2 * g1.derivative("y") - g1 * g2.derivative("y"))
    Y = k * (g2 * g1.derivative("x") - g1 * g2.derivative("x"))
    return SystemDef(table, (X, Y)), g1, g2, k * J


@pytest.mark.parametrize("seed", range(200))
def test_shared_cofactor_is_closed_under_sums(seed):
    rng = random.Random(seed)
    system, g1, g2, M = _shared_cofactor_system(rng)
    assert verify_poly_pi(system, g1).primary == M
    assert verify_poly_pi(system, g2).primary == M
    assert verify_poly_pi(system, g1 + g2).primary == M
    c = random_fraction(rng) or 1
    assert verify_poly_pi(system, g1 * c + g2).primary == M
