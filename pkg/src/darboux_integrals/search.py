# Searches for partial integrals: the complete planar Darboux polynomial search and
# the linear searches with a known cofactor
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import sympy

from ._factor import factor_univariate
from ._linalg import Matrix, Vector, row_space_basis, solve_linear
from ._poly import Exponents, MultiPoly, VarTable
from ._scalar import Scalar
from ._types import (
    DEFAULT_CANDIDATE_CAP,
    TIME_NAME,
    CandidateCapError,
    FailureReason,
    UnsupportedSystemError,
    VerificationError,
)
from .system import SystemDef, derive
from .verify import verify_poly_pi

__all__ = [
    "SearchConfig",
    "cofactor_monomials",
    "search_conditional",
    "search_exp_factor",
    "search_fixed_cofactor",
    "search_planar",
    "unknown_monomials",
]


@dataclass(frozen=True)
class SearchConfig:
    """Bounds of a Darboux polynomial search.

    `degree`: Degree k of the searched polynomials
    `cofactor`: Optional fixed cofactor M, which turns the search linear
    `candidate_cap`: Maximum number of top-part candidates tried
    `jobs`: Worker threads used to examine top-part candidates"""

    degree: int
    cofactor: Optional[MultiPoly] = None
    candidate_cap: int = DEFAULT_CANDIDATE_CAP
    jobs: int = 1

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError(f"search degree must be at least 1, got {self.degree}")
        if self.candidate_cap < 1:
            raise ValueError("candidate cap must be positive")


def _searched_variables(system: SystemDef) -> List[int]:
    table = system.table
    return [
        i
        for i, name in enumerate(table.names)
        if name != TIME_NAME or not system.is_autonomous
    ]


def _exponents(table: VarTable, positions: Sequence[int], degree: int) -> List[Exponents]:
    found = []
    for total in range(degree + 1):
        for combo in itertools.combinations_with_replacement(positions, total):
            exps = [0] * len(table)
            for i in combo:
                exps[i] += 1
            found.append(tuple(exps))
    return found


def unknown_monomials(system: SystemDef, degree: int) -> List[Exponents]:
    """Monomials of total degree <= degree over the states, the parameters and,
    for a nonautonomous system, the time"""
    if degree < 0:
        return []
    return _exponents(system.table, _searched_variables(system), degree)


def cofactor_monomials(system: SystemDef) -> List[Exponents]:
    """Monomials a cofactor may use: state degree <= d - 1 and total degree below
    the largest total degree of the right-hand sides"""
    n = system.n
    bound = max(X.total_degree for X in system.rhs) - 1
    return [
        e
        for e in unknown_monomials(system, bound)
        if sum(e[:n]) <= system.d - 1
    ]


def _solve_identity(
    table: VarTable, images: Sequence[MultiPoly], target: Optional[MultiPoly] = None
):
    """Coefficient vectors c with sum(c_i * images_i) == target"""
    rhs = target if target is not None else table.zero()
    monomials = sorted({e for f in list(images) + [rhs] for e, _ in f})
    if monomials:
        A = Matrix.from_rows([[f.coefficient(e) for f in images] for e in monomials])
    else:
        A = Matrix(0, len(images), ())
    return solve_linear(A, [rhs.coefficient(e) for e in monomials])


def _combine(table: VarTable, exponents: Sequence[Exponents], vector: Vector) -> MultiPoly:
    return MultiPoly(table, dict(zip(exponents, vector)))


def search_fixed_cofactor(system: SystemDef, M: MultiPoly, k: int) -> List[MultiPoly]:
    """Basis of the polynomials p of degree <= k with dp = p*M"""
    if M.deg_x > system.d - 1:
        raise ValueError(f"cofactor {M} exceeds state degree {system.d - 1}")
    exponents = unknown_monomials(system, k)
    table = system.table
    images = [derive(system, table.monomial(e)) - table.monomial(e) * M for e in exponents]
    basis = [
        _combine(table, exponents, v).primitive()
        for v in _solve_identity(table, images).nullspace
    ]
    logging.debug(f"cofactor {M}: {len(basis)} polynomials of degree <= {k}")
    return basis


def search_conditional(system: SystemDef, k: int) -> List[Tuple[MultiPoly, MultiPoly]]:
    """Polynomials p of degree <= k whose derivative has state degree <= d - 1"""
    if k < 1:
        raise ValueError(f"search degree must be at least 1, got {k}")
    table = system.table
    exponents = [e for e in unknown_monomials(system, k) if any(e)]
    n, d = system.n, system.d
    images = [
        derive(system, table.monomial(e)).filter_terms(lambda x: sum(x[:n]) >= d)
        for e in exponents
    ]
    result = []
    for vector in _solve_identity(table, images).nullspace:
        p = _combine(table, exponents, vector).primitive()
        result.append((p, derive(system, p)))
    return result


def search_exp_factor(
    system: SystemDef, p: MultiPoly, M: MultiPoly, h: int, deg_q: int
) -> List[Tuple[MultiPoly, MultiPoly]]:
    """Pairs (q, N) solving dq - h*q*M = p^h * N with deg q <= deg_q"""
    if h < 1:
        raise ValueError(f"exponent h must be at least 1, got {h}")
    if derive(system, p) != p * M:
        raise VerificationError(
            FailureReason.BASE_NOT_PI, f"{p} does not have cofactor {M}"
        )
    table = system.table
    q_exps = unknown_monomials(system, deg_q)
    n_exps = cofactor_monomials(system)
    power = p**h
    images = [
        derive(system, table.monomial(e)) - table.monomial(e) * M * h for e in q_exps
    ] + [-(power * table.monomial(e)) for e in n_exps]
    pairs = []
    for vector in _solve_identity(table, images).nullspace:
        q = _combine(table, q_exps, vector[: len(q_exps)])
        N = _combine(table, n_exps, vector[len(q_exps) :])
        if q.is_zero:
            continue
        scale = q.primitive().leading_term()[1] / q.leading_term()[1]
        pairs.append((q * scale, N * scale))
    return pairs


def _homogenize(f: MultiPoly, table: VarTable, x: str, y: str) -> MultiPoly:
    degree = f.total_degree
    i, j = table.index(x), table.index(y)
    terms = {}
    for exps, c in f:
        new = [0] * len(table)
        new[i] = exps[f.table.index(x)]
        new[j] = degree - new[i]
        terms[tuple(new)] = c
    return MultiPoly(table, terms)


def _top_factors(R: MultiPoly, x: str, y: str) -> List[MultiPoly]:
    """Distinct irreducible factors over Q of a homogeneous binary form"""
    table = R.table
    dehomogenized = R.substitute({y: 1})
    factors = [
        _homogenize(f, table, x, y)
        for f, _ in factor_univariate(dehomogenized).factors
    ]
    if dehomogenized.total_degree < R.total_degree:
        factors.insert(0, table.var(y))
    return factors


def _top_products(factors: Sequence[MultiPoly], k: int, cap: int) -> List[MultiPoly]:
    degrees = [f.total_degree for f in factors]
    # Number of multisets of factors of total degree j, to honour the cap up front
    counts = [1] + [0] * k
    for deg in degrees:
        for j in range(deg, k + 1):
            counts[j] += counts[j - deg]
    if counts[k] > cap:
        raise CandidateCapError(counts[k], cap)
    products = []

    def extend(start: int, remaining: int, current: MultiPoly) -> None:
        if remaining == 0:
            products.append(current)
            return
        for i in range(start, len(factors)):
            if degrees[i] <= remaining:
                extend(i, remaining - degrees[i], current * factors[i])

    extend(0, k, factors[0].table.const(1))
    return products


def _solve_low_cofactors(
    system: SystemDef,
    top: Optional[MultiPoly],
    top_exponent: Optional[Exponents],
    M_top: MultiPoly,
    k: int,
) -> List[MultiPoly]:
    """Cofactors M_top + M_low for which dp = p*M has a degree k solution.

    Either the top homogeneous part of p is fixed, or only the normalisation of
    one top coefficient to 1 (with earlier top coefficients 0) is imposed."""
    table = system.table
    symbols = table.symbols
    x, y = (symbols[table.index(name)] for name in system.states)
    low_exps = [e for e in cofactor_monomials(system) if sum(e[:2]) <= system.d - 2]
    if not low_exps:
        return [M_top]
    p_exps = unknown_monomials(system, k)
    top_exps = [e for e in p_exps if sum(e[:2]) == k]
    unknowns = []
    p_expr = top.to_sympy() if top is not None else sympy.Integer(0)
    for i, e in enumerate(p_exps):
        if sum(e[:2]) == k:
            if top is not None:
                continue
            assert top_exponent is not None
            position = top_exps.index(e)
            anchor = top_exps.index(top_exponent)
            if position < anchor:
                continue
            if position == anchor:
                p_expr += table.monomial(e).to_sympy()
                continue
        c = sympy.Symbol(f"c{i}")
        unknowns.append(c)
        p_expr += c * table.monomial(e).to_sympy()
    m_symbols = [sympy.Symbol(f"m{j}") for j in range(len(low_exps))]
    M_expr = M_top.to_sympy() + sum(
        m * table.monomial(e).to_sympy() for m, e in zip(m_symbols, low_exps)
    )
    X, Y = (rhs.to_sympy() for rhs in system.rhs)
    identity = sympy.expand(
        X * sympy.diff(p_expr, x) + Y * sympy.diff(p_expr, y) - p_expr * M_expr
    )
    equations = sympy.Poly(identity, *symbols).coeffs()
    cofactors: List[MultiPoly] = []
    for solution in sympy.solve(equations, unknowns + m_symbols, dict=True):
        values = [sympy.sympify(solution.get(m, m)) for m in m_symbols]
        for point in _cofactor_points(values):
            low = MultiPoly(
                table, {e: Scalar.from_sympy(v) for e, v in zip(low_exps, point)}
            )
            if M_top + low not in cofactors:
                cofactors.append(M_top + low)
    return cofactors


def _cofactor_points(values: Sequence[sympy.Expr]) -> List[List[sympy.Expr]]:
    """Rational points of one solution branch of the low cofactor coefficients.

    Symbols the solver leaves free are set to 0 and then to 1 one at a time, so
    a branch that is affine in them is spanned by the points returned. A point
    is only a candidate: the fixed-cofactor search decides whether a polynomial
    of the degree exists for it. Irrational points belong to polynomials over an
    extension of Q and are dropped."""
    free = sorted(set().union(*(v.free_symbols for v in values)), key=str)
    if free:
        logging.info(f"cofactor branch {values} is free in {free}")
    zero = {s: 0 for s in free}
    choices = [zero] + [{**zero, s: 1} for s in free]
    points: List[List[sympy.Expr]] = []
    for choice in choices:
        point = [v.subs(choice) for v in values]
        if not all(v.is_Rational for v in point):
            logging.debug(f"cofactor point {point} is not rational, dropped")
            continue
        if point not in points:
            points.append(point)
    return points


def _reduced_complement(
    space: Sequence[MultiPoly], known: Sequence[MultiPoly]
) -> List[MultiPoly]:
    """Basis of span(space) modulo span(known), with the pivot monomials of the
    known span eliminated"""
    if not space:
        return []
    table = space[0].table
    monomials = sorted(
        {e for f in list(space) + list(known) for e, _ in f},
        key=lambda e: (sum(e[: table.n_states]), e),
        reverse=True,
    )

    def vector(f: MultiPoly) -> List[Scalar]:
        return [f.coefficient(e) for e in monomials]

    known_rows = row_space_basis([vector(f) for f in known]) if known else []
    pivots = [next(j for j, v in enumerate(row) if v) for row in known_rows]
    residuals = []
    for f in space:
        row = vector(f)
        for pivot, known_row in zip(pivots, known_rows):
            factor = row[pivot]
            if factor:
                row = [a - factor * b for a, b in zip(row, known_row)]
        if any(row):
            residuals.append(row)
    basis = row_space_basis(residuals) if residuals else []
    return [MultiPoly(table, dict(zip(monomials, row))).primitive() for row in basis]


def _products_with_cofactor(
    lower: Sequence[Tuple[MultiPoly, MultiPoly]], M: MultiPoly, k: int
) -> List[MultiPoly]:
    found = []

    def extend(start: int, current: MultiPoly, cofactor: MultiPoly, degree: int):
        if degree == k and cofactor == M:
            found.append(current)
        for i in range(start, len(lower)):
            p, N = lower[i]
            if degree + p.total_degree <= k:
                extend(i, current * p, cofactor + N, degree + p.total_degree)

    if lower:
        table = lower[0][0].table
        extend(0, table.const(1), table.zero(), 0)
    return found


def _check_planar(system: SystemDef) -> None:
    if system.n != 2:
        raise UnsupportedSystemError(
            f"the complete search needs a planar system, this one has {system.n} states"
        )
    if not system.is_autonomous:
        raise UnsupportedSystemError("the complete search needs an autonomous system")
    if system.parameters:
        raise UnsupportedSystemError(
            f"bind the parameters {system.parameters} before a complete search"
        )
    if not all(X.is_rational for X in system.rhs):
        raise UnsupportedSystemError("the complete search needs rational coefficients")


def _cofactors_of_degree(
    system: SystemDef, k: int, cfg: SearchConfig
) -> List[MultiPoly]:
    x, y = system.states
    table = system.table
    d = system.d
    P_top, Q_top = (X.homogeneous_part(d) for X in system.rhs)
    R = table.var(x) * Q_top - table.var(y) * P_top
    jobs: List[Tuple[Optional[MultiPoly], Optional[Exponents], MultiPoly]] = []
    if R.is_zero:
        S = P_top.exact_div(table.var(x)) if P_top else Q_top.exact_div(table.var(y))
        M_top = S * k
        top_exps = [e for e in unknown_monomials(system, k) if sum(e[:2]) == k]
        if len(top_exps) > cfg.candidate_cap:
            raise CandidateCapError(len(top_exps), cfg.candidate_cap)
        jobs = [(None, e, M_top) for e in top_exps]
        logging.info(f"radial top part, cofactor top {M_top}")
    else:
        factors = _top_factors(R, x, y)
        candidates = _top_products(factors, k, cfg.candidate_cap)
        logging.info(f"{len(candidates)} top-part candidates of degree {k}")
        for top in candidates:
            numerator = P_top * top.derivative(x) + Q_top * top.derivative(y)
            if top.divides(numerator):
                jobs.append((top, None, numerator.exact_div(top)))

    def run(job) -> List[MultiPoly]:
        top, anchor, M_top = job
        return _solve_low_cofactors(system, top, anchor, M_top, k)

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            outcomes = list(pool.map(run, jobs))
    else:
        outcomes = [run(job) for job in jobs]
    cofactors: List[MultiPoly] = []
    for found in outcomes:
        for M in found:
            if M not in cofactors:
                cofactors.append(M)
    return cofactors


def _search_exact_degree(
    system: SystemDef,
    k: int,
    cfg: SearchConfig,
    lower: Sequence[Tuple[MultiPoly, MultiPoly]],
) -> List[Tuple[MultiPoly, MultiPoly]]:
    results = []
    for M in _cofactors_of_degree(system, k, cfg):
        space = search_fixed_cofactor(system, M, k)
        in_lower = _lower_degree_part(space, k)
        known = in_lower + _products_with_cofactor(lower, M, k)
        for p in _reduced_complement(space, known):
            report = verify_poly_pi(system, p)
            assert report.primary == M
            results.append((p, M))
            logging.info(f"found {p} with cofactor {M}")
    return results


def _lower_degree_part(space: Sequence[MultiPoly], k: int) -> List[MultiPoly]:
    """Basis of the elements of span(space) with state degree below k"""
    if not space:
        return []
    table = space[0].table
    n = table.n_states
    top = sorted({e for f in space for e, _ in f if sum(e[:n]) == k})
    if not top:
        return list(space)
    A = Matrix.from_rows([[f.coefficient(e) for f in space] for e in top])
    combos = solve_linear(A).nullspace
    return [
        sum((f * c for f, c in zip(space, combo)), table.zero()) for combo in combos
    ]


def _normal_order(pairs: Iterable[Tuple[MultiPoly, MultiPoly]]):
    unique: Dict[MultiPoly, MultiPoly] = {}
    for p, M in pairs:
        unique.setdefault(p.primitive(), M)
    return sorted(unique.items(), key=lambda item: (item[0].total_degree, str(item[0])))


def search_planar(system: SystemDef, cfg: SearchConfig) -> List[Tuple[MultiPoly, MultiPoly]]:
    """All Darboux polynomials of degree exactly cfg.degree over Q that are not
    combinations of lower-degree ones, with their cofactors.

    With a fixed cofactor the search reduces to search_fixed_cofactor and works
    for any system."""
    if cfg.cofactor is not None:
        return _normal_order(
            (p, cfg.cofactor)
            for p in search_fixed_cofactor(system, cfg.cofactor, cfg.degree)
            if not p.is_constant
        )
    _check_planar(system)
    lower: List[Tuple[MultiPoly, MultiPoly]] = []
    result: List[Tuple[MultiPoly, MultiPoly]] = []
    for k in range(1, cfg.degree + 1):
        result = _search_exact_degree(system, k, cfg, lower)
        lower += result
    return _normal_order(result)
