# Floating point cross-checks of exact results: RK4 trajectories, conservation
# drift of first integrals, cofactor and last multiplier identities along flows
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
import sympy

from ._poly import MultiPoly, VarTable
from ._types import TIME_NAME, IntegrationError, RationalLike, SingularLocusError
from .builder import IntegralExpr
from .system import SystemDef, derive, divergence
from .verify import ConditionalPI, ExpArctanPI, ExpRationalPI, PolyPI

__all__ = [
    "DEFAULT_STEP",
    "DEFAULT_TOLERANCE",
    "FD_EPSILON",
    "SINGULAR_GUARD",
    "ConservationReport",
    "IntegralEvaluator",
    "Trajectory",
    "check_conservation",
    "check_cofactor_numeric",
    "check_multiplier_numeric",
    "integrate_rk4",
    "sample_points",
]

DEFAULT_STEP = 1e-3
DEFAULT_TOLERANCE = 1e-6
SINGULAR_GUARD = 1e-9
FD_EPSILON = 1e-5

FloatArray = npt.NDArray[np.float64]


@dataclass(frozen=True)
class Trajectory:
    """Samples of a fixed-step solution.

    `times`: Shape (N + 1,), uniformly spaced
    `states`: Shape (N + 1, n)"""

    times: FloatArray
    states: FloatArray
    step: float
    method: str = "rk4"

    def __len__(self) -> int:
        return len(self.times)

    @property
    def end(self) -> FloatArray:
        return self.states[-1]


def _require_params(table: VarTable, params: Mapping[str, RationalLike]) -> None:
    missing = [name for name in table.parameters if name not in params]
    if missing:
        raise ValueError(f"parameters {missing} need values for numeric work")


def _substitutions(params: Mapping[str, RationalLike]) -> dict:
    return {
        sympy.Symbol(name): sympy.Rational(str(value)) for name, value in params.items()
    }


def _arguments(table: VarTable) -> Tuple[sympy.Symbol, ...]:
    """Lambdified functions take the states, then t"""
    return tuple(sympy.Symbol(name) for name in table.states) + (
        sympy.Symbol(TIME_NAME),
    )


def _compile(
    table: VarTable,
    exprs: Sequence,
    params: Mapping[str, RationalLike],
) -> Callable[..., List[float]]:
    _require_params(table, params)
    subs = _substitutions(params)
    bound = [sympy.sympify(e).subs(subs) for e in exprs]
    function = sympy.lambdify(_arguments(table), bound, modules="numpy")
    return lambda t, x: [float(v) for v in function(*x, t)]


def _rhs(system: SystemDef, params: Mapping[str, RationalLike]):
    function = _compile(system.table, [X.to_sympy() for X in system.rhs], params)
    return lambda t, x: np.array(function(t, x), dtype=float)


def integrate_rk4(
    system: SystemDef,
    x0: Sequence[float],
    t0: float,
    t1: float,
    step: float = DEFAULT_STEP,
    params: Optional[Mapping[str, RationalLike]] = None,
) -> Trajectory:
    """Classical fourth order Runge-Kutta with a fixed step"""
    if step <= 0 or t1 <= t0:
        raise ValueError(f"need step > 0 and t1 > t0, got {step}, [{t0}, {t1}]")
    if len(x0) != system.n:
        raise ValueError(f"{len(x0)} initial values for {system.n} states")
    f = _rhs(system, params or {})
    count = max(1, round((t1 - t0) / step))
    h = (t1 - t0) / count
    times = t0 + h * np.arange(count + 1)
    states = np.empty((count + 1, system.n))
    states[0] = np.asarray(x0, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(count):
            t, x = times[k], states[k]
            k1 = f(t, x)
            k2 = f(t + h / 2, x + h / 2 * k1)
            k3 = f(t + h / 2, x + h / 2 * k2)
            k4 = f(t + h, x + h * k3)
            new = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(new)):
                logging.error(f"trajectory from {list(x0)} blew up after t = {t}")
                raise IntegrationError(float(t))
            states[k + 1] = new
    return Trajectory(times, states, h)


class IntegralEvaluator:
    """Float evaluation of an integral expression together with its guard
    polynomials and the arctan denominators whose sign changes split a
    trajectory into branches"""

    def __init__(
        self, expr: IntegralExpr, params: Optional[Mapping[str, RationalLike]] = None
    ):
        self.expr = expr
        table = expr.table
        value = sympy.exp(-expr.time_factor.to_sympy())
        guards = []
        denominators = []
        for pi, g in expr.factors:
            gamma = g.to_sympy()
            match pi:
                case PolyPI(p=p):
                    base = p.to_sympy()
                    if gamma.is_integer:
                        value *= base**gamma
                    else:
                        value *= sympy.Abs(base) ** gamma
                    if not (gamma.is_integer and gamma >= 0):
                        guards.append(base)
                case ConditionalPI(p=p):
                    value *= sympy.exp(gamma * p.to_sympy())
                case ExpRationalPI(q=q, p=p, h=h):
                    base = p.to_sympy()
                    value *= sympy.exp(gamma * q.to_sympy() / base**h)
                    guards.append(base)
                case ExpArctanPI(v=v, u=u):
                    u_expr = u.to_sympy()
                    value *= sympy.exp(gamma * sympy.atan(v.to_sympy() / u_expr))
                    guards.append(u_expr**2 + v.to_sympy() ** 2)
                    denominators.append(u_expr)
                case _:
                    raise ValueError(f"{pi} has to be decomposed before evaluation")
        self._value = _compile(table, [value], params or {})
        self._guards = _compile(table, guards, params or {}) if guards else None
        self._branches = (
            _compile(table, denominators, params or {}) if denominators else None
        )

    def __call__(self, t: float, x: Sequence[float]) -> float:
        return self._value(t, x)[0]

    def guards(self, t: float, x: Sequence[float]) -> List[float]:
        return self._guards(t, x) if self._guards else []

    def branch(self, t: float, x: Sequence[float]) -> Tuple[int, ...]:
        if self._branches is None:
            return ()
        return tuple(int(np.sign(u)) for u in self._branches(t, x))


def _check_guards(evaluator: IntegralEvaluator, t: float, x: Sequence[float]) -> None:
    values = evaluator.guards(t, x)
    if any(abs(v) < SINGULAR_GUARD for v in values):
        raise SingularLocusError(f"a base polynomial nearly vanishes at t = {t}, {list(x)}")


@dataclass(frozen=True)
class ConservationReport:
    drift: float
    tol: float
    segments: int = 1
    values: List[float] = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return self.drift <= self.tol


def check_conservation(
    evaluator: IntegralEvaluator,
    trajectory: Trajectory,
    tol: float = DEFAULT_TOLERANCE,
) -> ConservationReport:
    """Largest relative change of F along each arctan branch of the trajectory"""
    drift = 0.0
    segments = 0
    values = []
    reference: Optional[float] = None
    current_branch = None
    for t, x in zip(trajectory.times, trajectory.states):
        _check_guards(evaluator, t, x)
        branch = evaluator.branch(t, x)
        if 0 in branch:
            # On the line u = 0 itself arctan(v/u) is undefined
            reference = None
            continue
        value = evaluator(t, x)
        values.append(value)
        if reference is None or branch != current_branch:
            reference, current_branch = value, branch
            segments += 1
            continue
        drift = max(drift, abs(value - reference) / max(1.0, abs(reference)))
    logging.info(f"conservation drift {drift:.3e} over {segments} segment(s)")
    return ConservationReport(drift, tol, segments, values)


def sample_points(
    n: int, count: int, seed: int = 0, low: float = -1.0, high: float = 1.0
) -> FloatArray:
    return np.random.default_rng(seed).uniform(low, high, size=(count, n))


def check_cofactor_numeric(
    system: SystemDef,
    g: MultiPoly,
    M: MultiPoly,
    points: Sequence[Sequence[float]],
    params: Optional[Mapping[str, RationalLike]] = None,
    t: float = 0.0,
) -> float:
    """Largest relative error of dg = g*M at the points, measured both on the
    exact residual and against a centered difference along the vector field"""
    params = params or {}
    table = system.table
    residual, g_f, gm_f = (
        _compile(table, [f.to_sympy()], params)
        for f in (derive(system, g) - g * M, g, g * M)
    )
    rhs = _rhs(system, params)
    worst = 0.0
    for point in points:
        x = np.asarray(point, dtype=float)
        expected = gm_f(t, x)[0]
        scale = max(1.0, abs(expected))
        worst = max(worst, abs(residual(t, x)[0]) / scale)
        shift = FD_EPSILON * rhs(t, x)
        forward = g_f(t + FD_EPSILON, x + shift)[0]
        backward = g_f(t - FD_EPSILON, x - shift)[0]
        difference = (forward - backward) / (2 * FD_EPSILON)
        worst = max(worst, abs(difference - expected) / scale)
    return worst


def check_multiplier_numeric(
    system: SystemDef,
    evaluator: IntegralEvaluator,
    trajectory: Trajectory,
    params: Optional[Mapping[str, RationalLike]] = None,
) -> float:
    """Largest relative residual of d(mu)/dt + mu*div along the trajectory"""
    div = _compile(system.table, [divergence(system).to_sympy()], params or {})
    mu = []
    for t, x in zip(trajectory.times, trajectory.states):
        _check_guards(evaluator, t, x)
        mu.append(evaluator(t, x))
    h = trajectory.step
    worst = 0.0
    for k in range(1, len(mu) - 1):
        t, x = trajectory.times[k], trajectory.states[k]
        derivative = (mu[k + 1] - mu[k - 1]) / (2 * h)
        expected = -mu[k] * div(t, x)[0]
        worst = max(worst, abs(derivative - expected) / max(1.0, abs(mu[k])))
    return worst
