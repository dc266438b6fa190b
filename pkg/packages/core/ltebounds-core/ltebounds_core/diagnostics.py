"""What each data source and each assumption contributes to the bounds.

Everything here is on the normalized outcome scale unless a field says
otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ltebounds_core.assumptions import AssumptionSpec
from ltebounds_core.exceptions import DomainError, EmptySetError
from ltebounds_core.logging import get_logger
from ltebounds_core.moments import EPS_FEAS, Interval, ObservationalMoments, ProblemMoments
from ltebounds_core.solver import BoundsResult, Scope, SolverConfig, solve_bounds

_logger = get_logger(__name__)


@dataclass(frozen=True)
class FormulaBounds:
    """Worst-case bounds computed in closed form.

    Attributes:
        derived: ``[E[YD] - E[Y(1-D)] - P(D=1), E[YD] - E[Y(1-D)] + P(D=0)]``,
            the interval the solver reproduces.
        printed: The same with the two arm shares swapped.  Coincides with
            *derived* when the arms are equally likely.
    """

    derived: Interval
    printed: Interval

    @property
    def conventions_agree(self) -> bool:
        return abs(self.derived.lo - self.printed.lo) <= EPS_FEAS and abs(
            self.derived.hi - self.printed.hi
        ) <= EPS_FEAS


def manski_formula_bounds(obs: ObservationalMoments) -> FormulaBounds:
    """Worst-case bounds on the effect from the observational moments alone.

    The derived interval always contains ``0``: without assumptions the
    sign of the effect is never identified.
    """
    treated = float(obs.mass[1] @ obs.mean[1])
    control = float(obs.mass[0] @ obs.mean[0])
    share0, share1 = (float(x) for x in obs.arm_shares)
    diff = treated - control
    return FormulaBounds(
        derived=Interval(diff - share1, diff + share0),
        printed=Interval(diff - share0, diff + share1),
    )


@dataclass(frozen=True)
class AmplificationReport:
    """Worst-case and restricted bounds, with and without the experiment.

    Attributes:
        assumption: The restricting assumption.
        worst_observational: Worst case, observational data only.
        worst_combined: Worst case, both data sources.
        restricted_observational: Under *assumption*, observational data only.
        restricted_combined: Under *assumption*, both data sources.
        nesting_ok: Combined bounds sit inside observational-only ones and
            restricted bounds inside worst-case ones.
        amplified: The experiment strictly narrows the restricted bounds.
        experiment_uninformative: The experiment leaves the worst-case
            bounds unchanged.
    """

    assumption: AssumptionSpec
    worst_observational: BoundsResult
    worst_combined: BoundsResult
    restricted_observational: BoundsResult
    restricted_combined: BoundsResult
    nesting_ok: bool
    amplified: bool
    experiment_uninformative: bool

    @property
    def widths(self) -> dict[str, float]:
        return {
            "worst-case/observational": self.worst_observational.normalized.width,
            "worst-case/combined": self.worst_combined.normalized.width,
            f"{self.assumption.label}/observational": (
                self.restricted_observational.normalized.width
            ),
            f"{self.assumption.label}/combined": self.restricted_combined.normalized.width,
        }

    @property
    def width_ratio(self) -> float:
        """Restricted combined width over restricted observational-only width."""
        before = self.restricted_observational.normalized.width
        after = self.restricted_combined.normalized.width
        if before <= 0.0:
            return float("nan")
        return after / before


def _same(first: Interval, second: Interval, tol: float) -> bool:
    return first.within(second, tol) and second.within(first, tol)


def amplification_report(
    pm: ProblemMoments,
    a: AssumptionSpec,
    cfg: SolverConfig | None = None,
    tol: float = 1e-8,
) -> AmplificationReport:
    """Solve the four combinations of assumption and scope and compare them.

    Raises:
        DomainError: If *pm* carries no experimental moments.
    """
    if pm.exp is None:
        raise DomainError("amplification needs experimental moments")
    cfg = cfg or SolverConfig()
    observational = replace(cfg, scope=Scope.OBSERVATIONAL)
    combined = replace(cfg, scope=Scope.COMBINED)
    worst = AssumptionSpec.worst_case()

    wo = solve_bounds(pm, worst, observational)
    wc = solve_bounds(pm, worst, combined)
    ro = solve_bounds(pm, a, observational)
    rc = solve_bounds(pm, a, combined)
    wo_i, wc_i, ro_i, rc_i = (r.normalized for r in (wo, wc, ro, rc))

    nesting_ok = (
        wc_i.within(wo_i, tol)
        and rc_i.within(ro_i, tol)
        and ro_i.within(wo_i, tol)
        and rc_i.within(wc_i, tol)
    )
    if not nesting_ok:
        _logger.warning("bounds under %s violate the nesting order", a.label)
    amplified = (
        ro.feasible
        and rc.feasible
        and rc_i.within(ro_i, tol)
        and ro_i.width - rc_i.width > tol
    )
    return AmplificationReport(
        assumption=a,
        worst_observational=wo,
        worst_combined=wc,
        restricted_observational=ro,
        restricted_combined=rc,
        nesting_ok=nesting_ok,
        amplified=amplified,
        experiment_uninformative=_same(wo_i, wc_i, tol),
    )


def misspecification_distance(interval: Interval, tau_true: float) -> float:
    """Distance from *tau_true* to the nearest point of *interval*.

    Raises:
        EmptySetError: If *interval* is empty.
    """
    if interval.empty:
        raise EmptySetError("distance to an empty interval is undefined")
    return max(interval.lo - tau_true, tau_true - interval.hi, 0.0)


@dataclass(frozen=True)
class LucCheck:
    """Whether latent unconfoundedness pins the effect down without the experiment.

    Attributes:
        trivial: Each arm's observed cell means agree across support
            points with positive mass.
        tau: The point value of the effect when *trivial*, normalized
            scale; ``None`` otherwise.
    """

    trivial: bool
    tau: float | None = None

    def __bool__(self) -> bool:
        return self.trivial


def luc_trivial_mean_check(obs: ObservationalMoments, tol: float = EPS_FEAS) -> LucCheck:
    """Check whether the observed cell means are constant in the short-term outcome.

    When they are, the link under latent unconfoundedness is the same
    constant for every short-term law and the effect is the difference
    of the two constants.  An arm with no observed cells is not trivial.
    """
    common = []
    for d in (0, 1):
        means = obs.mean[d][obs.mass[d] > 0.0]
        if means.size == 0 or np.ptp(means) > tol:
            return LucCheck(False)
        common.append(float(means[0]))
    return LucCheck(True, common[1] - common[0])
