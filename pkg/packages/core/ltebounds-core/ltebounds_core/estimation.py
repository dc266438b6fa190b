"""Plug-in estimation of the bounds from finite samples.

The estimator evaluates the population machinery at the empirical
moments.  Samples are assumed i.i.d.; nothing here checks it.

In finite samples the empirical constraint set can be empty even when
the population one is not.  :func:`plug_in_bounds` then falls back to
:func:`feasibility_relaxation`, the smallest uniform slack that makes the
set nonempty, and reports the result as relaxed.  This is a surrogate for
a criterion-based estimator, not an implementation of one.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ltebounds_core.assumptions import AssumptionSpec
from ltebounds_core.exceptions import DomainError, EmptySetError
from ltebounds_core.logging import get_logger
from ltebounds_core.moments import (
    ExperimentalMoments,
    Interval,
    ObservationalMoments,
    ProblemMoments,
    SupportSpec,
)
from ltebounds_core.solver import (
    BoundsResult,
    SolverConfig,
    Status,
    constraint_set_nonempty,
    scoped_moments,
    solve_bounds,
)

_logger = get_logger(__name__)

#: Width of the bracket at which :func:`feasibility_relaxation` stops.
RELAXATION_TOL: float = 1e-6


def _column(values: object, name: str) -> np.ndarray:
    array = np.asarray(values)
    if array.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional, got shape {array.shape}")
    return array


def _codes(values: np.ndarray, name: str, low: int, high: int) -> np.ndarray:
    if values.size and not np.all(np.equal(np.mod(values, 1), 0)):
        raise DomainError(f"{name} must hold integers")
    codes = values.astype(int)
    bad = (codes < low) | (codes > high)
    if bad.any():
        raise DomainError(
            f"{name} = {codes[bad][0]} at record {int(np.argmax(bad))} "
            f"is outside {{{low}..{high}}}"
        )
    return codes


@dataclass(frozen=True, eq=False)
class ObservationalSample:
    """Records ``(y, s, d)`` from the observational data.

    Attributes:
        y: Long-term outcomes on the original scale.
        s: Short-term support points, ``1..k``.
        d: Treatment arms, ``0`` or ``1``.
    """

    y: np.ndarray
    s: np.ndarray
    d: np.ndarray

    def __post_init__(self) -> None:
        y = _column(self.y, "y").astype(float)
        s = _column(self.s, "s")
        d = _column(self.d, "d")
        if not y.shape == s.shape == d.shape:
            raise DomainError(
                f"observational columns differ in length: y={y.size}, s={s.size}, d={d.size}"
            )
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "d", d)

    def __len__(self) -> int:
        return self.y.size

    def subset(self, mask: np.ndarray) -> ObservationalSample:
        return ObservationalSample(self.y[mask], self.s[mask], self.d[mask])


@dataclass(frozen=True, eq=False)
class ExperimentalSample:
    """Records ``(s, d, z)`` from the experimental data.

    Attributes:
        s: Short-term support points, ``1..k``.
        d: Realized treatment arms, ``0`` or ``1``.
        z: Instrument values, ``1..z_count``.
    """

    s: np.ndarray
    d: np.ndarray
    z: np.ndarray

    def __post_init__(self) -> None:
        s = _column(self.s, "s")
        d = _column(self.d, "d")
        z = _column(self.z, "z")
        if not s.shape == d.shape == z.shape:
            raise DomainError(
                f"experimental columns differ in length: s={s.size}, d={d.size}, z={z.size}"
            )
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "z", z)

    def __len__(self) -> int:
        return self.s.size

    def subset(self, mask: np.ndarray) -> ExperimentalSample:
        return ExperimentalSample(self.s[mask], self.d[mask], self.z[mask])


def _cells(s: np.ndarray, d: np.ndarray, k: int) -> np.ndarray:
    return _codes(d, "d", 0, 1) * k + _codes(s, "s", 1, k) - 1


def empirical_moments(
    obs: ObservationalSample,
    exp: ExperimentalSample | None,
    support: SupportSpec,
    *,
    clip: bool = False,
) -> ProblemMoments:
    """Cell frequencies and cell means of the samples.

    Outcomes are normalized onto ``[0, 1]``.  Instrument values with no
    experimental records are dropped with a warning and the remaining
    ones keep their order.

    Args:
        obs: Observational records.
        exp: Experimental records, or ``None`` for observational data only.
        support: Support size, instrument count and outcome range.
        clip: Clip outcomes into ``[y_low, y_high]`` instead of failing.

    Raises:
        DomainError: On empty samples, codes out of range, or outcomes
            out of range without *clip*.
    """
    k = support.k
    if len(obs) == 0:
        raise DomainError("observational sample is empty")
    y = obs.y
    outside = (y < support.y_low) | (y > support.y_high)
    if outside.any():
        if not clip:
            raise DomainError(
                f"{int(outside.sum())} outcomes fall outside "
                f"[{support.y_low}, {support.y_high}]; pass clip=True to clip them"
            )
        _logger.warning(
            "clipping %d outcomes into [%g, %g]", outside.sum(), support.y_low, support.y_high
        )
        y = np.clip(y, support.y_low, support.y_high)

    cells = _cells(obs.s, obs.d, k)
    counts = np.bincount(cells, minlength=2 * k).astype(float)
    sums = np.bincount(cells, weights=support.normalize(y), minlength=2 * k)
    mean = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    observational = ObservationalMoments(
        (counts / len(obs)).reshape(2, k), mean.reshape(2, k)
    )
    if exp is None:
        return ProblemMoments(replace(support, z_count=1), observational)

    if len(exp) == 0:
        raise DomainError("experimental sample is empty")
    z = _codes(exp.z, "z", 1, support.z_count)
    cells = _cells(exp.s, exp.d, k)
    blocks = []
    for value in range(1, support.z_count + 1):
        here = cells[z == value]
        if here.size == 0:
            _logger.warning("no experimental records with z=%d; dropping it", value)
            continue
        blocks.append((np.bincount(here, minlength=2 * k) / here.size).reshape(2, k))
    experimental = ExperimentalMoments(np.stack(blocks))
    return ProblemMoments(
        replace(support, z_count=len(blocks)), observational, experimental
    )


def feasibility_relaxation(
    pm: ProblemMoments,
    a: AssumptionSpec,
    cfg: SolverConfig | None = None,
    *,
    tol: float = RELAXATION_TOL,
) -> tuple[float, ProblemMoments]:
    """Smallest uniform slack that makes the constraint set nonempty.

    Bisects on ``[0, 1]`` until the bracket is narrower than *tol* and
    returns its upper end together with the relaxed moments.  Feasible
    moments come back unchanged with slack ``0``.

    Args:
        pm: Problem moments, already restricted to the wanted scope.
        a: Maintained assumption.
        cfg: Solver configuration for the feasibility searches.
        tol: Bracket width at which to stop.

    Returns:
        ``(slack, relaxed)``.  For a custom system that stays infeasible
        even at slack ``1`` the slack is ``1`` and the relaxed moments are
        still infeasible.
    """
    if constraint_set_nonempty(pm, a, cfg):
        return 0.0, pm
    low, high = 0.0, 1.0
    if not constraint_set_nonempty(pm.relaxed(high), a, cfg):
        _logger.warning("%s stays infeasible at slack 1", a.label)
        return high, pm.relaxed(high)
    while high - low > tol:
        mid = 0.5 * (low + high)
        if constraint_set_nonempty(pm.relaxed(mid), a, cfg):
            high = mid
        else:
            low = mid
    _logger.debug("relaxation bracket [%.8f, %.8f]", low, high)
    return high, pm.relaxed(high)


def plug_in_bounds(
    obs: ObservationalSample,
    exp: ExperimentalSample | None,
    support: SupportSpec,
    a: AssumptionSpec,
    cfg: SolverConfig | None = None,
    *,
    clip: bool = False,
) -> BoundsResult:
    """Bounds at the empirical moments, relaxed when those admit no pair.

    A relaxed result has status ``RELAXED`` and carries the slack in
    :attr:`BoundsResult.relaxation`.
    """
    cfg = cfg or SolverConfig()
    pm = empirical_moments(obs, exp, support, clip=clip)
    result = solve_bounds(pm, a, cfg)
    if result.status is not Status.INFEASIBLE:
        return result
    slack, relaxed = feasibility_relaxation(scoped_moments(pm, cfg.scope), a, cfg)
    _logger.warning(
        "empirical constraint set under %s is empty; relaxing by %.6f", a.label, slack
    )
    return solve_bounds(relaxed, a, cfg)


def hausdorff_distance(first: Interval, second: Interval) -> float:
    """Hausdorff distance between two closed intervals.

    Raises:
        EmptySetError: If either interval is empty.
    """
    if first.empty or second.empty:
        raise EmptySetError("Hausdorff distance to an empty interval is undefined")
    return max(abs(first.lo - second.lo), abs(first.hi - second.hi))
