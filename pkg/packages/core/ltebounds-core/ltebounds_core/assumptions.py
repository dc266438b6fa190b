"""Modeling assumptions on the temporal link functions.

An assumption restricts which link functions ``m`` are admissible.
Combined with the data, it cuts the set of link functions compatible
with a fixed short-term law ``gamma`` -- the *fiber* at ``gamma`` --
down to a box, optionally with extra linear rows:

=============  ==========================================================
Kind           Fiber at ``gamma``
=============  ==========================================================
worst-case     the data box
liv            running extrema of the data box along the support
ti             one shared box, the intersection of the two arms' boxes
liv-ti         the shared box, then running extrema; monotonicity and
               equality rows kept for the inner linear program
luc            the observed cell means exactly (zero width)
custom         the data box plus a user linear system
=============  ==========================================================

Where the fiber is a box, the link minimizing or maximizing the
long-term effect picks box corners and is available in closed form
(:func:`minimal_selector`, :func:`maximal_selector`).  The other kinds
return :data:`NO_CLOSED_FORM` and go through a linear program.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from ltebounds_core.exceptions import DomainError, FiberEmptyError
from ltebounds_core.moments import ProblemMoments, ShortTermLaw, TemporalLink, data_box
from ltebounds_core.simplex import LpStatus, solve_lp

#: A fiber is empty when some upper bound falls this far below its lower bound.
FIBER_TOL: float = 1e-9


class AssumptionKind(StrEnum):
    WORST_CASE = "worst-case"
    LIV = "liv"
    TI = "ti"
    LIV_AND_TI = "liv-ti"
    LUC = "luc"
    CUSTOM = "custom"


class Direction(StrEnum):
    INCREASING = "increasing"
    DECREASING = "decreasing"


class NoClosedForm(enum.Enum):
    """Sentinel type returned by selectors that need a linear program."""

    TOKEN = "no-closed-form"


NO_CLOSED_FORM = NoClosedForm.TOKEN

_CLOSED_FORM = frozenset(
    {AssumptionKind.WORST_CASE, AssumptionKind.LIV, AssumptionKind.TI, AssumptionKind.LUC}
)
_MONOTONE = frozenset({AssumptionKind.LIV, AssumptionKind.LIV_AND_TI})
_TIED = frozenset({AssumptionKind.TI, AssumptionKind.LIV_AND_TI})


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """Linear restrictions ``a_ineq @ v >= b_ineq`` and ``a_eq @ v == b_eq``.

    ``v`` is the ``2k``-vector ``(m[0, :], m[1, :])``, which is what
    ``m.ravel()`` gives for a ``(2, k)`` link array.

    Attributes:
        k: Support size; every matrix has ``2k`` columns.
        a_ineq: Inequality rows.
        b_ineq: Inequality right-hand sides.
        a_eq: Equality rows; must have full row rank.
        b_eq: Equality right-hand sides.
    """

    k: int
    a_ineq: np.ndarray | None = None
    b_ineq: np.ndarray | None = None
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None

    def __post_init__(self) -> None:
        width = 2 * self.k
        for rows, rhs, name in (
            ("a_ineq", "b_ineq", "inequality"),
            ("a_eq", "b_eq", "equality"),
        ):
            matrix = getattr(self, rows)
            vector = getattr(self, rhs)
            if matrix is None or np.size(matrix) == 0:
                matrix, vector = np.zeros((0, width)), np.zeros(0)
            else:
                matrix = np.atleast_2d(np.array(matrix, dtype=float))
                vector = np.atleast_1d(np.array(vector, dtype=float))
            if matrix.shape[1] != width:
                raise DomainError(
                    f"{name} system has {matrix.shape[1]} columns; expected 2k = {width}"
                )
            if vector.shape != (matrix.shape[0],):
                raise DomainError(
                    f"{name} system has {matrix.shape[0]} rows but {vector.size} right-hand sides"
                )
            matrix.setflags(write=False)
            vector.setflags(write=False)
            object.__setattr__(self, rows, matrix)
            object.__setattr__(self, rhs, vector)
        if self.a_eq.shape[0] and np.linalg.matrix_rank(self.a_eq) < self.a_eq.shape[0]:
            raise DomainError("equality rows must have full row rank")

    @property
    def is_empty(self) -> bool:
        return self.a_ineq.shape[0] == 0 and self.a_eq.shape[0] == 0

    def satisfied(self, m: np.ndarray, tol: float = FIBER_TOL) -> bool:
        v = np.asarray(m, dtype=float).ravel()
        return bool(
            np.all(self.a_ineq @ v >= self.b_ineq - tol)
            and np.all(np.abs(self.a_eq @ v - self.b_eq) <= tol)
        )


@dataclass(frozen=True)
class AssumptionSpec:
    """A modeling assumption on the temporal link functions.

    Prefer the named constructors: ``AssumptionSpec.luc()``,
    ``AssumptionSpec.liv(Direction.DECREASING)`` and so on.

    Attributes:
        kind: Which assumption.
        direction: Monotonicity direction for ``liv`` and ``liv-ti``.
        system: The user system for ``custom``; ``None`` otherwise.
    """

    kind: AssumptionKind
    direction: Direction = Direction.INCREASING
    system: LinearSystem | None = None

    def __post_init__(self) -> None:
        if self.kind is AssumptionKind.CUSTOM and self.system is None:
            raise DomainError("a custom assumption needs a linear system")
        if self.kind is not AssumptionKind.CUSTOM and self.system is not None:
            raise DomainError(f"{self.kind} does not take a linear system")

    @classmethod
    def worst_case(cls) -> AssumptionSpec:
        return cls(AssumptionKind.WORST_CASE)

    @classmethod
    def liv(cls, direction: Direction = Direction.INCREASING) -> AssumptionSpec:
        return cls(AssumptionKind.LIV, direction)

    @classmethod
    def ti(cls) -> AssumptionSpec:
        return cls(AssumptionKind.TI)

    @classmethod
    def liv_and_ti(cls, direction: Direction = Direction.INCREASING) -> AssumptionSpec:
        return cls(AssumptionKind.LIV_AND_TI, direction)

    @classmethod
    def luc(cls) -> AssumptionSpec:
        return cls(AssumptionKind.LUC)

    @classmethod
    def custom(cls, system: LinearSystem) -> AssumptionSpec:
        return cls(AssumptionKind.CUSTOM, system=system)

    @property
    def has_closed_form(self) -> bool:
        return self.kind in _CLOSED_FORM

    @property
    def label(self) -> str:
        if self.kind in _MONOTONE:
            return f"{self.kind}({self.direction})"
        return str(self.kind)


@dataclass(frozen=True, eq=False)
class FiberDescription:
    """Link functions compatible with data and assumption at one short-term law.

    Attributes:
        box_lo: Pointwise lower bounds, shape ``(2, k)``.
        box_hi: Pointwise upper bounds, shape ``(2, k)``.
        extra_linear: Rows the box does not capture, or ``None``.
        feasible: Whether any link function satisfies all of it.
        ties_m0_m1: Whether the two arms share one link function.
    """

    box_lo: np.ndarray
    box_hi: np.ndarray
    extra_linear: LinearSystem | None
    feasible: bool
    ties_m0_m1: bool


def monotone_envelope(
    lo: np.ndarray, hi: np.ndarray, direction: Direction
) -> tuple[np.ndarray, np.ndarray]:
    """Tightest monotone bounds inside the rows of ``[lo, hi]``.

    Works row-wise on any 2-D array, so a stack of lattice points can go
    through at once.
    """
    if direction is Direction.DECREASING:
        lo, hi = lo[:, ::-1], hi[:, ::-1]
    lo = np.maximum.accumulate(lo, axis=1)
    hi = np.minimum.accumulate(hi[:, ::-1], axis=1)[:, ::-1]
    if direction is Direction.DECREASING:
        lo, hi = lo[:, ::-1], hi[:, ::-1]
    return lo, hi


def luc_box(pm: ProblemMoments) -> tuple[np.ndarray, np.ndarray]:
    """The latent-unconfoundedness fiber, which does not depend on ``gamma``.

    Observed cells pin ``m`` to the cell mean (widened by any slack).
    A cell with no observational mass has no identified mean and keeps
    the uninformative ``[0, 1]``.
    """
    observed = pm.obs.mass > 0.0
    mean = pm.obs.mean
    lo = np.where(observed, np.clip(mean - pm.slack, 0.0, 1.0), 0.0)
    hi = np.where(observed, np.clip(mean + pm.slack, 0.0, 1.0), 1.0)
    return lo, hi


def refine_box(
    a: AssumptionSpec, pm: ProblemMoments, gamma: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Box part of the fiber at the short-term laws *gamma* (a raw array).

    Raises:
        DomainError: If *gamma* is below the observational masses.
    """
    if a.kind is AssumptionKind.LUC:
        return luc_box(pm)
    lo, hi = data_box(pm, gamma)
    if a.kind in _TIED:
        shared_lo = np.maximum(lo[0], lo[1])
        shared_hi = np.minimum(hi[0], hi[1])
        lo, hi = np.vstack([shared_lo, shared_lo]), np.vstack([shared_hi, shared_hi])
    if a.kind in _MONOTONE:
        lo, hi = monotone_envelope(lo, hi, a.direction)
    return lo, hi


def residual_system(a: AssumptionSpec, k: int) -> LinearSystem | None:
    """Rows of the fiber beyond its box, in ``m.ravel()`` coordinates."""
    if a.kind is AssumptionKind.CUSTOM:
        return a.system
    if a.kind is not AssumptionKind.LIV_AND_TI:
        return None
    sign = 1.0 if a.direction is Direction.INCREASING else -1.0
    ineq = np.zeros((2 * (k - 1), 2 * k))
    for d in (0, 1):
        for s in range(k - 1):
            ineq[d * (k - 1) + s, d * k + s + 1] = sign
            ineq[d * (k - 1) + s, d * k + s] = -sign
    eq = np.zeros((k, 2 * k))
    eq[np.arange(k), k + np.arange(k)] = 1.0
    eq[np.arange(k), np.arange(k)] = -1.0
    return LinearSystem(k, ineq, np.zeros(2 * (k - 1)), eq, np.zeros(k))


def system_violation(system: LinearSystem, lo: np.ndarray, hi: np.ndarray) -> float:
    """Phase-one residual of *system* over the box ``[lo, hi]``; ``0`` when satisfiable."""
    result = solve_lp(
        np.zeros(lo.size),
        lower=lo.ravel(),
        upper=np.maximum(hi, lo).ravel(),
        a_ub=-system.a_ineq,
        b_ub=-system.b_ineq,
        a_eq=system.a_eq,
        b_eq=system.b_eq,
    )
    return 0.0 if result.status is LpStatus.OPTIMAL else result.infeasibility


def fiber_bounds(a: AssumptionSpec, pm: ProblemMoments, law: ShortTermLaw) -> FiberDescription:
    """Describe the fiber of link functions at *law*.

    An empty fiber is reported through ``feasible``, not raised: the
    outer search treats such laws as excluded.
    """
    lo, hi = refine_box(a, pm, law.gamma)
    feasible = bool(np.all(hi - lo >= -FIBER_TOL))
    system = residual_system(a, pm.k)
    if feasible and a.kind is AssumptionKind.CUSTOM and not system.is_empty:
        feasible = system_violation(system, lo, hi) == 0.0
    return FiberDescription(
        box_lo=lo,
        box_hi=hi,
        extra_linear=system,
        feasible=feasible,
        ties_m0_m1=a.kind in _TIED,
    )


def extreme_link(
    a: AssumptionSpec, lo: np.ndarray, hi: np.ndarray, gamma: np.ndarray, upper: bool
) -> np.ndarray:
    """Corner of the box ``[lo, hi]`` that minimizes (or maximizes) the effect.

    The effect increases in ``m[1]`` and decreases in ``m[0]``.  Under
    treatment invariance the shared link enters with coefficient
    ``gamma[1] - gamma[0]``, so each point takes the end that sign
    favours.
    """
    if a.kind is AssumptionKind.TI:
        coef = gamma[1] - gamma[0]
        favoured, other = (hi[1], lo[1]) if upper else (lo[1], hi[1])
        shared = np.where(coef >= 0.0, favoured, other)
        return np.vstack([shared, shared])
    if upper:
        return np.vstack([lo[0], hi[1]])
    return np.vstack([hi[0], lo[1]])


def _selector(
    a: AssumptionSpec, pm: ProblemMoments, law: ShortTermLaw, upper: bool
) -> TemporalLink | NoClosedForm:
    if not a.has_closed_form:
        return NO_CLOSED_FORM
    fiber = fiber_bounds(a, pm, law)
    if not fiber.feasible:
        raise FiberEmptyError(f"no link function satisfies {a.label} at this short-term law")
    return TemporalLink(extreme_link(a, fiber.box_lo, fiber.box_hi, law.gamma, upper))


def minimal_selector(
    a: AssumptionSpec, pm: ProblemMoments, law: ShortTermLaw
) -> TemporalLink | NoClosedForm:
    """Link function in the fiber at *law* with the smallest effect.

    Returns:
        The link, or :data:`NO_CLOSED_FORM` for ``liv-ti`` and ``custom``.

    Raises:
        FiberEmptyError: If the fiber at *law* is empty.
    """
    return _selector(a, pm, law, upper=False)


def maximal_selector(
    a: AssumptionSpec, pm: ProblemMoments, law: ShortTermLaw
) -> TemporalLink | NoClosedForm:
    """Mirror image of :func:`minimal_selector`."""
    return _selector(a, pm, law, upper=True)


def satisfies_assumption(
    a: AssumptionSpec, m: np.ndarray, pm: ProblemMoments, tol: float = FIBER_TOL
) -> bool:
    """Whether the link array *m* meets the restrictions of *a* itself.

    Only the assumption is checked here; the data box is the business of
    :func:`~ltebounds_core.membership`.
    """
    m = np.asarray(m, dtype=float)
    if a.kind in _MONOTONE:
        steps = np.diff(m, axis=1)
        if a.direction is Direction.DECREASING:
            steps = -steps
        if np.any(steps < -tol):
            return False
    if a.kind in _TIED and np.any(np.abs(m[1] - m[0]) > tol):
        return False
    if a.kind is AssumptionKind.LUC:
        lo, hi = luc_box(pm)
        if np.any(m < lo - tol) or np.any(m > hi + tol):
            return False
    if a.kind is AssumptionKind.CUSTOM:
        return a.system.satisfied(m, tol)
    return True
