"""Checks on problem moments and on candidate ``(m, gamma)`` pairs.

:func:`validate_moments` never raises.  Moment files come from people
and from finite samples, and the useful answer is the full list of what
is wrong, not the first thing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ltebounds_core.assumptions import AssumptionSpec, satisfies_assumption
from ltebounds_core.exceptions import DomainError
from ltebounds_core.moments import (
    EPS_FEAS,
    ProblemMoments,
    ShortTermLaw,
    TemporalLink,
    data_box,
    gamma_lower_bounds,
)


@dataclass(frozen=True)
class Issue:
    """One violated invariant.

    Attributes:
        code: Stable machine-readable identifier, e.g. ``"obs-mass-sum"``.
        message: Human-readable description.
    """

    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    """Everything :func:`validate_moments` found.

    Attributes:
        issues: Violations in the order they were found.
    """

    issues: tuple[Issue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues

    @property
    def messages(self) -> list[str]:
        return [issue.message for issue in self.issues]

    @property
    def codes(self) -> set[str]:
        return {issue.code for issue in self.issues}


def _sum_issue(code: str, label: str, total: float, tol: float, where: str = "") -> Issue | None:
    if total < 1.0 - tol:
        return Issue(code, f"{label} mass deficit {1.0 - total:.6g}{where}")
    if total > 1.0 + tol:
        return Issue(code, f"{label} mass excess {total - 1.0:.6g}{where}")
    return None


def validate_moments(pm: ProblemMoments, tol: float = EPS_FEAS) -> ValidationReport:
    """Report every invariant *pm* violates.

    Besides the simplex and range checks on each moment, flags arms
    whose short-term law cannot exist: lower bounds summing past one
    mean the two data sources disagree about the short-term outcome.
    """
    issues: list[Issue] = []
    obs = pm.obs

    for d, s in np.argwhere(obs.mass < -tol):
        issues.append(
            Issue("obs-negative-mass", f"observational mass is negative at d={d}, s={s + 1}")
        )
    issue = _sum_issue("obs-mass-sum", "observational", float(obs.mass.sum()), tol)
    if issue:
        issues.append(issue)
    for d, s in np.argwhere((obs.mean < -tol) | (obs.mean > 1.0 + tol)):
        issues.append(
            Issue("obs-mean-range", f"observational mean outside [0, 1] at d={d}, s={s + 1}")
        )

    if pm.exp is not None:
        for z, block in enumerate(pm.exp.mass, start=1):
            for d, s in np.argwhere(block < -tol):
                issues.append(
                    Issue(
                        "exp-negative-mass",
                        f"experimental mass is negative at z={z}, d={d}, s={s + 1}",
                    )
                )
            issue = _sum_issue(
                "exp-mass-sum", "experimental", float(block.sum()), tol, f" for z={z}"
            )
            if issue:
                issues.append(issue)

    totals = gamma_lower_bounds(pm).sum(axis=1)
    for d, total in enumerate(totals):
        if total > 1.0 + tol:
            issues.append(
                Issue(
                    "gamma-infeasible",
                    f"gamma infeasible for d={d}: lower bounds sum to {total:.6g}",
                )
            )
    return ValidationReport(tuple(issues))


def membership(
    link: TemporalLink,
    law: ShortTermLaw,
    pm: ProblemMoments,
    a: AssumptionSpec,
    tol: float = EPS_FEAS,
) -> bool:
    """Whether ``(link, law)`` is in the identified set of ``(m, gamma)``.

    Checks that each law is a probability vector respecting the lower
    bounds, that each link value lies in its data box, and that the link
    satisfies *a*.
    """
    gamma, m = law.gamma, link.m
    if gamma.shape != pm.obs.mass.shape or m.shape != gamma.shape:
        return False
    if np.any(gamma < -tol) or np.any(np.abs(gamma.sum(axis=1) - 1.0) > tol):
        return False
    if np.any(gamma < gamma_lower_bounds(pm) - tol):
        return False
    if np.any(m < -tol) or np.any(m > 1.0 + tol):
        return False
    try:
        lo, hi = data_box(pm, gamma)
    except DomainError:
        return False
    if np.any(m < lo - tol) or np.any(m > hi + tol):
        return False
    return satisfies_assumption(a, m, pm, tol)
