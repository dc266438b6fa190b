"""Sharp bounds on the long-term effect.

The identified set of the effect is the range of ``T(m, gamma)`` over
all data-compatible pairs.  Splitting the problem at ``gamma`` gives a
bilevel program: the inner problem picks the extreme link function in
the fiber at ``gamma``, the outer one searches the polytope of
short-term laws.  :func:`solve_bounds` dispatches on how hard the outer
problem is:

* ``luc`` and ``worst-case`` -- the extreme link is free of ``gamma``
  after expansion, so the outer objective is linear and
  :func:`linear_gamma_program` solves it exactly.
* the lower bounds force ``gamma`` -- nothing to search; exact.
* ``liv`` and ``ti`` -- closed-form inner problem, nonconvex outer one:
  :func:`outer_search`.
* ``liv-ti`` and ``custom`` -- inner linear program, then
  :func:`alternating_bilinear`.

The last two report ``Status.LOCAL_SEARCH``; :mod:`ltebounds_core.oracle`
certifies them at small sizes.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterator
from dataclasses import dataclass, replace
from enum import StrEnum

import numpy as np

from ltebounds_core.assumptions import (
    FIBER_TOL,
    AssumptionKind,
    AssumptionSpec,
    extreme_link,
    luc_box,
    refine_box,
    residual_system,
    system_violation,
)
from ltebounds_core.exceptions import DomainError, InfeasibleError
from ltebounds_core.logging import get_logger
from ltebounds_core.moments import (
    EPS_FEAS,
    Interval,
    ProblemMoments,
    ShortTermLaw,
    TemporalLink,
    gamma_lower_bounds,
    lte_value,
)
from ltebounds_core.simplex import LpStatus, solve_lp

_logger = get_logger(__name__)

# Cap on improving sweeps at one step size.
_MAX_SWEEPS = 200


class Scope(StrEnum):
    COMBINED = "combined"
    OBSERVATIONAL = "observational"


class Status(StrEnum):
    EXACT = "exact"
    LOCAL_SEARCH = "local-search"
    INFEASIBLE = "infeasible"
    RELAXED = "relaxed"


class Sense(StrEnum):
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class SolverConfig:
    """Tuning for the outer searches.

    Attributes:
        multistarts: Random starting laws per search, on top of the
            uniform start and the vertices.
        grid_refinements: How many times the step size halves.
        step_init: Mass moved per coordinate step at the start.
        tol_obj: Smallest objective change counted as an improvement.
        seed: Seed for the random starts.
        scope: Use the experimental moments, or ignore them.
        max_alternations: Cap on alternations per start in
            :func:`alternating_bilinear`.
        max_vertex_starts: Cap on vertex starts for large supports.
    """

    multistarts: int = 32
    grid_refinements: int = 20
    step_init: float = 0.25
    tol_obj: float = 1e-10
    seed: int = 1729
    scope: Scope = Scope.COMBINED
    max_alternations: int = 100
    max_vertex_starts: int = 64

    def __post_init__(self) -> None:
        if self.multistarts < 1:
            raise DomainError(f"multistarts must be at least 1, got {self.multistarts}")
        if self.grid_refinements < 0:
            raise DomainError(f"grid_refinements must be nonnegative, got {self.grid_refinements}")
        if self.step_init <= 0:
            raise DomainError(f"step_init must be positive, got {self.step_init}")
        if self.tol_obj <= 0:
            raise DomainError(f"tol_obj must be positive, got {self.tol_obj}")
        if self.max_alternations < 1:
            raise DomainError(f"max_alternations must be at least 1, got {self.max_alternations}")
        object.__setattr__(self, "scope", Scope(self.scope))


@dataclass(frozen=True)
class Witness:
    """A pair attaining an endpoint.

    Attributes:
        link: Temporal link functions.
        law: Short-term laws.
        value: Effect at the pair, normalized scale.
    """

    link: TemporalLink
    law: ShortTermLaw
    value: float


@dataclass(frozen=True)
class TraceEntry:
    """One start of one search.

    Attributes:
        sense: Which endpoint the search was after.
        start: Label of the starting point, e.g. ``"uniform"``.
        value: Best effect reached from this start, normalized scale;
            infinite when the start never reached a nonempty fiber.
        steps: Accepted moves or alternations.
    """

    sense: Sense
    start: str
    value: float
    steps: int


@dataclass(frozen=True)
class SearchResult:
    """Best endpoint found by one search.

    Attributes:
        value: The endpoint; ``-inf`` (max) or ``+inf`` (min) when no
            start reached a nonempty fiber.
        witness: The attaining pair, or ``None``.
        trace: One entry per start.
    """

    value: float
    witness: Witness | None
    trace: tuple[TraceEntry, ...]


@dataclass(frozen=True)
class BoundsResult:
    """Bounds on the long-term effect.

    Attributes:
        interval: The bounds on the original outcome scale; the empty
            set when infeasible.
        status: How the bounds were obtained.
        assumption: The maintained assumption.
        scope: Which data were used.
        lower_witness: Pair attaining the lower bound.
        upper_witness: Pair attaining the upper bound.
        trace: Per-start log of both searches.
        scale: ``(y_low, y_high)``.
        relaxation: Slack that made the constraint set nonempty; ``0``
            unless ``status`` is ``RELAXED``.
    """

    interval: Interval
    status: Status
    assumption: AssumptionSpec
    scope: Scope
    lower_witness: Witness | None = None
    upper_witness: Witness | None = None
    trace: tuple[TraceEntry, ...] = ()
    scale: tuple[float, float] = (0.0, 1.0)
    relaxation: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.status is not Status.INFEASIBLE

    @property
    def normalized(self) -> Interval:
        """The bounds on the ``[0, 1]`` outcome scale."""
        return self.interval.scaled(1.0 / (self.scale[1] - self.scale[0]))


def scoped_moments(pm: ProblemMoments, scope: Scope) -> ProblemMoments:
    """*pm*, without experimental moments for the observational scope."""
    return pm.observational_only() if scope is Scope.OBSERVATIONAL else pm


def linear_gamma_program(
    coef: np.ndarray, lower: np.ndarray, sense: Sense | str
) -> ShortTermLaw:
    """Optimize ``sum_d sum_s coef[d, s] gamma[d, s]`` over the short-term laws.

    Each arm is independent: the lower bounds are mandatory and the rest
    of the unit mass goes to the best coefficient, the first one on ties.

    Args:
        coef: Objective coefficients, shape ``(2, k)``.
        lower: Lower bounds, shape ``(2, k)``.
        sense: ``"min"`` or ``"max"``.

    Raises:
        DomainError: If some arm's lower bounds sum past one.
    """
    coef = np.asarray(coef, dtype=float)
    lower = np.asarray(lower, dtype=float)
    if coef.shape != lower.shape or coef.ndim != 2 or coef.shape[0] != 2:
        raise DomainError(
            f"coef {coef.shape} and lower {lower.shape} must share shape (2, k)"
        )
    free = 1.0 - lower.sum(axis=1)
    if np.any(free < -EPS_FEAS):
        d = int(np.argmin(free))
        raise DomainError(f"lower bounds for d={d} sum to {1.0 - free[d]:.6g} > 1")
    pick = np.argmax(coef, axis=1) if Sense(sense) is Sense.MAX else np.argmin(coef, axis=1)
    gamma = lower.copy()
    gamma[[0, 1], pick] += np.maximum(free, 0.0)
    return ShortTermLaw(gamma)


def _linear_coefficients(a: AssumptionSpec, pm: ProblemMoments, upper: bool) -> np.ndarray:
    """Coefficients of ``gamma -> T(selector(gamma), gamma)``, up to a constant.

    Valid for ``luc`` (the fiber ignores ``gamma``) and for an unrelaxed
    ``worst-case``, where ``gamma * mu * pi = mu * P_O`` leaves each box
    end times ``gamma`` affine: ``mu P`` at the bottom, ``mu P + gamma - P``
    at the top.
    """
    if a.kind is AssumptionKind.LUC:
        lo, hi = luc_box(pm)
        m = extreme_link(a, lo, hi, pm.obs.mass, upper)
        return np.vstack([-m[0], m[1]])
    coef = np.zeros_like(pm.obs.mass)
    if upper:
        coef[1] = 1.0
    else:
        coef[0] = -1.0
    return coef


def _witness(a: AssumptionSpec, pm: ProblemMoments, gamma: np.ndarray, upper: bool) -> Witness:
    lo, hi = refine_box(a, pm, gamma)
    m = extreme_link(a, lo, hi, gamma, upper)
    return Witness(TemporalLink(m), ShortTermLaw(gamma), lte_value(m, gamma))


def _solve_linear(
    pm: ProblemMoments, a: AssumptionSpec, cfg: SolverConfig, sense: Sense
) -> SearchResult:
    upper = sense is Sense.MAX
    coef = _linear_coefficients(a, pm, upper)
    law = linear_gamma_program(coef, gamma_lower_bounds(pm), sense)
    witness = _witness(a, pm, law.gamma, upper)
    _logger.debug("linear program (%s): %.10g", sense, witness.value)
    return SearchResult(
        witness.value, witness, (TraceEntry(sense, "linear-program", witness.value, 1),)
    )


def _inner_lp(
    a: AssumptionSpec, pm: ProblemMoments, gamma: np.ndarray, upper: bool
) -> tuple[np.ndarray | None, float]:
    """Extreme link at *gamma* by linear program: ``(m, value)`` or ``(None, violation)``."""
    lo, hi = refine_box(a, pm, gamma)
    gap = float(np.max(lo - hi))
    if gap > FIBER_TOL:
        return None, gap
    hi = np.maximum(hi, lo)
    system = residual_system(a, pm.k)
    if system is None or system.is_empty:
        m = extreme_link(a, lo, hi, gamma, upper)
        return m, lte_value(m, gamma)
    result = solve_lp(
        np.concatenate([-gamma[0], gamma[1]]),
        lower=lo.ravel(),
        upper=hi.ravel(),
        a_ub=-system.a_ineq,
        b_ub=-system.b_ineq,
        a_eq=system.a_eq,
        b_eq=system.b_eq,
        maximize=upper,
    )
    if result.status is LpStatus.INFEASIBLE:
        return None, result.infeasibility
    m = result.x.reshape(2, pm.k)
    return m, lte_value(m, gamma)


def _violation(a: AssumptionSpec, pm: ProblemMoments) -> Callable[[np.ndarray], float]:
    """Distance from a nonempty fiber, as a function of ``gamma``."""
    system = residual_system(a, pm.k)
    needs_lp = a.kind is AssumptionKind.CUSTOM and system is not None and not system.is_empty

    def violation(gamma: np.ndarray) -> float:
        lo, hi = refine_box(a, pm, gamma)
        gap = float(np.max(lo - hi))
        if gap > FIBER_TOL:
            return gap
        if needs_lp:
            return system_violation(system, lo, hi)
        return 0.0

    return violation


def _starts(lower: np.ndarray, cfg: SolverConfig) -> Iterator[tuple[str, np.ndarray]]:
    free = np.maximum(1.0 - lower.sum(axis=1), 0.0)
    k = lower.shape[1]
    yield "uniform", lower + free[:, None] / k
    vertices = itertools.islice(itertools.product(range(k), repeat=2), cfg.max_vertex_starts)
    for s0, s1 in vertices:
        gamma = lower.copy()
        gamma[0, s0] += free[0]
        gamma[1, s1] += free[1]
        yield f"vertex({s0 + 1},{s1 + 1})", gamma
    rng = np.random.default_rng(cfg.seed)
    for n in range(cfg.multistarts):
        weights = rng.dirichlet(np.ones(k), size=2)
        yield f"random-{n}", lower + free[:, None] * weights


def _coordinate_search(
    objective: Callable[[np.ndarray], float],
    gamma: np.ndarray,
    lower: np.ndarray,
    cfg: SolverConfig,
) -> tuple[np.ndarray, int]:
    """Maximize *objective* by moving mass between pairs of support points."""
    k = gamma.shape[1]
    moves = [(d, i, j) for d in (0, 1) for i in range(k) for j in range(k) if i != j]
    current = objective(gamma)
    step = cfg.step_init
    accepted = 0
    for _ in range(cfg.grid_refinements + 1):
        for _ in range(_MAX_SWEEPS):
            improved = False
            for d, i, j in moves:
                amount = min(step, gamma[d, i] - lower[d, i])
                if amount <= 0.0:
                    continue
                trial = gamma.copy()
                trial[d, i] -= amount
                trial[d, j] += amount
                value = objective(trial)
                if value > current + cfg.tol_obj:
                    gamma, current = trial, value
                    improved = True
                    accepted += 1
            if not improved:
                break
        step /= 2.0
    return gamma, accepted


def _reach_feasible(
    violation: Callable[[np.ndarray], float],
    gamma: np.ndarray,
    lower: np.ndarray,
    cfg: SolverConfig,
) -> np.ndarray | None:
    if violation(gamma) <= 0.0:
        return gamma
    gamma, _ = _coordinate_search(lambda g: -violation(g), gamma, lower, cfg)
    return gamma if violation(gamma) <= 0.0 else None


def _unreached(sense: Sense, trace: list[TraceEntry]) -> SearchResult:
    value = -np.inf if sense is Sense.MAX else np.inf
    return SearchResult(value, None, tuple(trace))


def outer_search(
    pm: ProblemMoments, a: AssumptionSpec, cfg: SolverConfig, sense: Sense | str
) -> SearchResult:
    """Multistart search over the short-term laws with closed-form selectors.

    Starts from the lower bounds plus uniform free mass, from every
    vertex, and from ``cfg.multistarts`` random points.  A start with an
    empty fiber is first moved toward a nonempty one.  Each search moves
    mass between pairs of support points within an arm, halving the step
    ``cfg.grid_refinements`` times.

    Raises:
        DomainError: If *a* has no closed-form selector.
    """
    if not a.has_closed_form:
        raise DomainError(f"{a.label} has no closed-form selector; use alternating_bilinear")
    sense = Sense(sense)
    upper = sense is Sense.MAX
    sign = 1.0 if upper else -1.0
    lower = gamma_lower_bounds(pm)
    violation = _violation(a, pm)

    def score(gamma: np.ndarray) -> float:
        lo, hi = refine_box(a, pm, gamma)
        if np.any(hi - lo < -FIBER_TOL):
            return -np.inf
        return sign * lte_value(extreme_link(a, lo, hi, gamma, upper), gamma)

    best: tuple[float, np.ndarray] | None = None
    trace: list[TraceEntry] = []
    for label, start in _starts(lower, cfg):
        gamma = _reach_feasible(violation, start, lower, cfg)
        if gamma is None:
            trace.append(TraceEntry(sense, label, -sign * np.inf, 0))
            continue
        gamma, steps = _coordinate_search(score, gamma, lower, cfg)
        value = score(gamma)
        trace.append(TraceEntry(sense, label, sign * value, steps))
        if best is None or value > best[0] + cfg.tol_obj:
            best = (value, gamma)
    _logger.debug("outer search (%s, %s): %d starts", a.label, sense, len(trace))
    if best is None:
        return _unreached(sense, trace)
    witness = _witness(a, pm, best[1], upper)
    return SearchResult(witness.value, witness, tuple(trace))


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.where(num > 0.0, np.inf, 0.0)
    return np.divide(num, den, out=out, where=(num > 0.0) & (den > 0.0))


def _gamma_step(
    pm: ProblemMoments, m: np.ndarray, gamma: np.ndarray, lower: np.ndarray, sense: Sense
) -> np.ndarray:
    """Best short-term laws for fixed links, keeping *m* inside every data box.

    ``m`` stays in the box of cell ``(d, s)`` exactly when ``gamma[d, s]``
    is at least ``mu P / (m + slack)`` and ``(1 - mu) P / (1 - m + slack)``,
    unless ``m`` is within the slack of the cell mean, where any
    ``gamma`` will do.  The current *gamma* always qualifies.
    """
    mass, mean, slack = pm.obs.mass, pm.obs.mean, pm.slack
    need = np.maximum(
        _ratio(mean * mass, m + slack), _ratio((1.0 - mean) * mass, 1.0 - m + slack)
    )
    need = np.where(np.abs(m - mean) <= slack + 1e-12, 0.0, need)
    tight = np.maximum(lower, np.minimum(need, gamma))
    if np.any(1.0 - tight.sum(axis=1) < -EPS_FEAS):
        return gamma
    return linear_gamma_program(np.vstack([-m[0], m[1]]), tight, sense).gamma


def alternating_bilinear(
    pm: ProblemMoments, a: AssumptionSpec, cfg: SolverConfig, sense: Sense | str
) -> SearchResult:
    """Alternate between the inner linear program in ``m`` and the one in ``gamma``.

    Both steps keep the other block feasible, so the effect never moves
    against *sense*; a step that does raises :class:`AssertionError`.
    Stops when an alternation gains less than ``cfg.tol_obj``.
    """
    sense = Sense(sense)
    upper = sense is Sense.MAX
    sign = 1.0 if upper else -1.0
    lower = gamma_lower_bounds(pm)
    violation = _violation(a, pm)

    best: tuple[float, np.ndarray, np.ndarray] | None = None
    trace: list[TraceEntry] = []
    for label, start in _starts(lower, cfg):
        gamma = _reach_feasible(violation, start, lower, cfg)
        m, value = (None, 0.0) if gamma is None else _inner_lp(a, pm, gamma, upper)
        if gamma is None or m is None:
            trace.append(TraceEntry(sense, label, -sign * np.inf, 0))
            continue
        steps = 0
        while steps < cfg.max_alternations:
            steps += 1
            candidate = _gamma_step(pm, m, gamma, lower, sense)
            m_next, value_next = _inner_lp(a, pm, candidate, upper)
            if m_next is None:
                break
            gain = sign * (value_next - value)
            if gain < -1e-9:
                raise AssertionError(
                    f"alternation moved the {sense} objective the wrong way by {-gain:.3g}"
                )
            if gain <= cfg.tol_obj:
                break
            gamma, m, value = candidate, m_next, value_next
        trace.append(TraceEntry(sense, label, value, steps))
        if best is None or sign * value > sign * best[0] + cfg.tol_obj:
            best = (value, m, gamma)
    _logger.debug("alternating search (%s, %s): %d starts", a.label, sense, len(trace))
    if best is None:
        return _unreached(sense, trace)
    value, m, gamma = best
    witness = Witness(TemporalLink(m), ShortTermLaw(gamma), value)
    return SearchResult(value, witness, tuple(trace))


def _solve_point(
    pm: ProblemMoments, a: AssumptionSpec, cfg: SolverConfig, sense: Sense
) -> SearchResult:
    upper = sense is Sense.MAX
    lower = gamma_lower_bounds(pm)
    gamma = linear_gamma_program(np.zeros_like(lower), lower, sense).gamma
    m, value = _inner_lp(a, pm, gamma, upper)
    if m is None:
        return _unreached(sense, [TraceEntry(sense, "forced", -np.inf if upper else np.inf, 0)])
    witness = Witness(TemporalLink(m), ShortTermLaw(gamma), value)
    return SearchResult(value, witness, (TraceEntry(sense, "forced", value, 0),))


def find_feasible_gamma(
    pm: ProblemMoments, a: AssumptionSpec, cfg: SolverConfig | None = None
) -> np.ndarray | None:
    """Some short-term laws with a nonempty fiber, or ``None`` if the search finds none."""
    cfg = cfg or SolverConfig()
    lower = gamma_lower_bounds(pm)
    if np.any(1.0 - lower.sum(axis=1) < -EPS_FEAS):
        return None
    violation = _violation(a, pm)
    for _, start in _starts(lower, cfg):
        gamma = _reach_feasible(violation, start, lower, cfg)
        if gamma is not None:
            return gamma
    return None


def constraint_set_nonempty(
    pm: ProblemMoments, a: AssumptionSpec, cfg: SolverConfig | None = None
) -> bool:
    """Whether any ``(m, gamma)`` pair is compatible with *pm* and *a*."""
    if np.any(1.0 - gamma_lower_bounds(pm).sum(axis=1) < -EPS_FEAS):
        return False
    if a.kind in (AssumptionKind.WORST_CASE, AssumptionKind.LUC):
        return True
    return find_feasible_gamma(pm, a, cfg) is not None


def solve_bounds(
    pm: ProblemMoments,
    a: AssumptionSpec,
    cfg: SolverConfig | None = None,
    *,
    raise_on_infeasible: bool = False,
) -> BoundsResult:
    """Bounds on the long-term effect under assumption *a*.

    Args:
        pm: Problem moments; validate them first.
        a: Maintained assumption.
        cfg: Solver configuration; defaults to :class:`SolverConfig`.
        raise_on_infeasible: Raise instead of reporting an empty set.

    Returns:
        A :class:`BoundsResult` on the original outcome scale.

    Raises:
        InfeasibleError: With *raise_on_infeasible*, when the constraint
            set is empty.
    """
    cfg = cfg or SolverConfig()
    pm = scoped_moments(pm, cfg.scope)
    free = 1.0 - gamma_lower_bounds(pm).sum(axis=1)
    empty = BoundsResult(
        Interval.empty_set(),
        Status.INFEASIBLE,
        a,
        cfg.scope,
        scale=(pm.support.y_low, pm.support.y_high),
        relaxation=pm.slack,
    )

    if np.any(free < -EPS_FEAS):
        _logger.info("no short-term law fits the data (free mass %s)", np.round(free, 6))
        if raise_on_infeasible:
            raise InfeasibleError("short-term lower bounds sum past one")
        return empty

    if a.kind is AssumptionKind.LUC or (a.kind is AssumptionKind.WORST_CASE and not pm.slack):
        status, search = Status.EXACT, _solve_linear
    elif np.all(free <= EPS_FEAS):
        status, search = Status.EXACT, _solve_point
    elif a.has_closed_form:
        status, search = Status.LOCAL_SEARCH, outer_search
    else:
        status, search = Status.LOCAL_SEARCH, alternating_bilinear
    _logger.debug("dispatching %s (%s scope) as %s", a.label, cfg.scope, status)

    low = search(pm, a, cfg, Sense.MIN)
    high = search(pm, a, cfg, Sense.MAX)
    trace = low.trace + high.trace
    if low.witness is None or high.witness is None:
        _logger.info("every short-term law has an empty fiber under %s", a.label)
        if raise_on_infeasible:
            raise InfeasibleError(f"no link function satisfies {a.label} at any short-term law")
        return replace(empty, trace=trace)

    lo, hi = sorted((low.value, high.value))
    interval = Interval(lo, hi).scaled(pm.support.scale)
    if pm.slack:
        status = Status.RELAXED
    _logger.info(
        "bounds under %s (%s scope): [%.6g, %.6g], %s",
        a.label,
        cfg.scope,
        interval.lo,
        interval.hi,
        status,
    )
    return BoundsResult(
        interval=interval,
        status=status,
        assumption=a,
        scope=cfg.scope,
        lower_witness=low.witness,
        upper_witness=high.witness,
        trace=trace,
        scale=(pm.support.y_low, pm.support.y_high),
        relaxation=pm.slack,
    )
