"""Domain types, the long-term effect functional, and the data constraints.

Every per-arm quantity is a ``(2, k)`` float array indexed ``[d, s]``:
row ``d`` is the treatment arm, column ``s`` the zero-based index of a
short-term support point (support point ``s + 1`` in files and on the
command line).  Experimental masses add a leading instrument axis,
``(z_count, 2, k)``.

Outcomes are normalized to ``[0, 1]`` on construction of the moments;
bounds are rescaled by ``y_high - y_low`` only when reported.

The data restrict a candidate pair of short-term laws ``gamma`` and link
functions ``m`` in two ways:

* ``gamma[d, s]`` can be no smaller than the mass any data source
  already puts on ``(S = s, D = d)`` -- see :func:`gamma_lower_bounds`.
* given ``gamma``, the observed share of cell ``(d, s)`` is the latent
  propensity ``P_O(S=s, D=d) / gamma[d, s]`` and ``m[d, s]`` must lie in
  the box that share leaves open -- see :func:`data_box`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ltebounds_core.exceptions import DomainError

#: Feasibility tolerance for population-moment checks.
EPS_FEAS: float = 1e-9

#: The two treatment arms, in array row order.
ARMS: tuple[int, int] = (0, 1)


def _frozen_array(values: object, shape: tuple[int, ...], name: str) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.shape != shape:
        raise DomainError(f"{name} must have shape {shape}, got {array.shape}")
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class SupportSpec:
    """Size of the short-term support and scale of the long-term outcome.

    Attributes:
        k: Number of short-term support points.
        z_count: Number of experimental instrument values.
        y_low: Lower end of the long-term outcome range.
        y_high: Upper end of the long-term outcome range.
    """

    k: int
    z_count: int = 1
    y_low: float = 0.0
    y_high: float = 1.0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise DomainError(f"k must be at least 1, got {self.k}")
        if self.z_count < 1:
            raise DomainError(f"z_count must be at least 1, got {self.z_count}")
        if not self.y_low < self.y_high:
            raise DomainError(f"y_low ({self.y_low}) must be below y_high ({self.y_high})")

    @property
    def scale(self) -> float:
        """Width of the outcome range; multiplies normalized effects."""
        return self.y_high - self.y_low

    def normalize(self, y: np.ndarray) -> np.ndarray:
        """Map outcomes from ``[y_low, y_high]`` onto ``[0, 1]``."""
        return (np.asarray(y, dtype=float) - self.y_low) / self.scale


@dataclass(frozen=True, eq=False)
class ObservationalMoments:
    """Identified moments of the observational sample.

    Attributes:
        mass: ``P_O(S = s, D = d)``, shape ``(2, k)``.
        mean: ``E_O[Y | S = s, D = d]`` on the normalized scale.  Cells
            with zero mass carry mean ``0``; every formula multiplies a
            mean by its mass, so the sentinel is never read.
    """

    mass: np.ndarray
    mean: np.ndarray

    def __post_init__(self) -> None:
        mass = np.array(self.mass, dtype=float)
        if mass.ndim != 2 or mass.shape[0] != 2:
            raise DomainError(f"observational mass must have shape (2, k), got {mass.shape}")
        mean = np.array(self.mean, dtype=float)
        if mean.shape != mass.shape:
            raise DomainError(
                f"observational mean shape {mean.shape} does not match mass {mass.shape}"
            )
        mean[mass == 0.0] = 0.0
        mass.setflags(write=False)
        mean.setflags(write=False)
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "mean", mean)

    @property
    def k(self) -> int:
        return self.mass.shape[1]

    @property
    def arm_shares(self) -> np.ndarray:
        """``P_O(D = d)`` for each arm."""
        return self.mass.sum(axis=1)


@dataclass(frozen=True, eq=False)
class ExperimentalMoments:
    """Identified moments of the experimental sample.

    Attributes:
        mass: ``P_E(S = s, D = d | Z = z)``, shape ``(z_count, 2, k)``.
    """

    mass: np.ndarray

    def __post_init__(self) -> None:
        mass = np.array(self.mass, dtype=float)
        if mass.ndim != 3 or mass.shape[1] != 2:
            raise DomainError(
                f"experimental mass must have shape (z_count, 2, k), got {mass.shape}"
            )
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)

    @property
    def k(self) -> int:
        return self.mass.shape[2]

    @property
    def z_count(self) -> int:
        return self.mass.shape[0]

    def relabeled(self, order: list[int] | tuple[int, ...]) -> ExperimentalMoments:
        """Return the same moments with instrument values permuted."""
        return ExperimentalMoments(self.mass[list(order)])


@dataclass(frozen=True, eq=False)
class ProblemMoments:
    """Everything the data identify, for one covariate cell.

    Attributes:
        support: Support and outcome scale.
        obs: Observational moments.
        exp: Experimental moments, or ``None`` for the
            observational-only scope.
        slack: Uniform relaxation of the constraint set.  ``0`` for the
            problem the data actually pose; see
            :func:`~ltebounds_core.feasibility_relaxation`.
    """

    support: SupportSpec
    obs: ObservationalMoments
    exp: ExperimentalMoments | None = None
    slack: float = 0.0

    def __post_init__(self) -> None:
        if self.obs.k != self.support.k:
            raise DomainError(
                f"observational moments cover {self.obs.k} support points, "
                f"support declares {self.support.k}"
            )
        if self.exp is not None:
            if self.exp.k != self.support.k:
                raise DomainError(
                    f"experimental moments cover {self.exp.k} support points, "
                    f"support declares {self.support.k}"
                )
            if self.exp.z_count != self.support.z_count:
                raise DomainError(
                    f"experimental moments cover {self.exp.z_count} instrument values, "
                    f"support declares {self.support.z_count}"
                )
        if not 0.0 <= self.slack <= 1.0:
            raise DomainError(f"slack must lie in [0, 1], got {self.slack}")

    @property
    def k(self) -> int:
        return self.support.k

    def observational_only(self) -> ProblemMoments:
        """Drop the experimental moments."""
        return replace(self, exp=None)

    def relaxed(self, slack: float) -> ProblemMoments:
        """Return the same moments with a uniform constraint slack."""
        return replace(self, slack=slack)


@dataclass(frozen=True, eq=False)
class ShortTermLaw:
    """Laws of the short-term potential outcomes.

    Attributes:
        gamma: ``P(S(d) = s)``, shape ``(2, k)``; each row is a
            probability vector.
    """

    gamma: np.ndarray

    def __post_init__(self) -> None:
        gamma = np.array(self.gamma, dtype=float)
        object.__setattr__(self, "gamma", _frozen_array(gamma, (2, gamma.shape[-1]), "gamma"))


@dataclass(frozen=True, eq=False)
class TemporalLink:
    """Temporal link functions ``m[d, s] = E[Y(d) | S(d) = s]``.

    Attributes:
        m: Shape ``(2, k)``, normalized outcome scale.
    """

    m: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.m, dtype=float)
        object.__setattr__(self, "m", _frozen_array(m, (2, m.shape[-1]), "m"))


@dataclass(frozen=True)
class Interval:
    """A closed interval, or the empty set.

    Attributes:
        lo: Lower endpoint (``nan`` when empty).
        hi: Upper endpoint (``nan`` when empty).
        empty: Whether the interval is the empty set.
    """

    lo: float
    hi: float
    empty: bool = field(default=False)

    def __post_init__(self) -> None:
        if not self.empty and self.lo > self.hi:
            raise DomainError(f"interval endpoints out of order: [{self.lo}, {self.hi}]")

    @classmethod
    def empty_set(cls) -> Interval:
        return cls(math.nan, math.nan, empty=True)

    @property
    def width(self) -> float:
        return 0.0 if self.empty else self.hi - self.lo

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return not self.empty and self.lo - tol <= value <= self.hi + tol

    def within(self, other: Interval, tol: float = 0.0) -> bool:
        """Whether this interval is a subset of *other*, up to *tol*."""
        if self.empty:
            return True
        if other.empty:
            return False
        return other.lo - tol <= self.lo and self.hi <= other.hi + tol

    def scaled(self, factor: float) -> Interval:
        if self.empty:
            return self
        return Interval(self.lo * factor, self.hi * factor)


def gamma_lower_bounds(pm: ProblemMoments) -> np.ndarray:
    """Smallest mass each short-term law may put on each cell.

    ``max(max_z P_E(S=s, D=d | Z=z), P_O(S=s, D=d))``, less any slack
    and floored at zero.  Without experimental moments this is the
    observational cell mass.

    Returns:
        Array of shape ``(2, k)``.
    """
    lower = np.array(pm.obs.mass)
    if pm.exp is not None:
        lower = np.maximum(lower, pm.exp.mass.max(axis=0))
    if pm.slack:
        lower = np.maximum(lower - pm.slack, 0.0)
    return lower


def gamma_lower_bound(pm: ProblemMoments, d: int, s: int) -> float:
    """Scalar form of :func:`gamma_lower_bounds` for arm *d*, support index *s*."""
    return float(gamma_lower_bounds(pm)[d, s])


def free_mass(pm: ProblemMoments) -> np.ndarray:
    """Probability left unassigned by the lower bounds, per arm."""
    return 1.0 - gamma_lower_bounds(pm).sum(axis=1)


def _check_law(pm: ProblemMoments, gamma: np.ndarray) -> None:
    short = gamma < pm.obs.mass - EPS_FEAS - pm.slack
    if short.any():
        d, s = (int(i) for i in np.argwhere(short)[0])
        raise DomainError(
            f"gamma[{d}][{s}] = {gamma[d, s]:.6g} is below the observational mass "
            f"{pm.obs.mass[d, s]:.6g}; the latent propensity would exceed 1"
        )


def latent_propensities(pm: ProblemMoments, gamma: np.ndarray) -> np.ndarray:
    """``P_O(S=s, D=d) / gamma[d, s]`` for every cell, ``0`` where ``gamma`` is ``0``.

    Args:
        pm: Problem moments.
        gamma: Short-term laws as a ``(2, k)`` array.

    Raises:
        DomainError: If some ``gamma[d, s]`` is smaller than the
            observational mass of its cell.
    """
    gamma = np.asarray(gamma, dtype=float)
    _check_law(pm, gamma)
    mass = pm.obs.mass
    ratio = np.divide(mass, gamma, out=np.zeros_like(gamma), where=gamma > 0.0)
    return np.clip(ratio, 0.0, 1.0)


def latent_propensity(pm: ProblemMoments, law: ShortTermLaw, d: int, s: int) -> float:
    """Latent propensity of cell ``(d, s)`` under *law*.

    Raises:
        DomainError: If ``law.gamma[d, s]`` is below ``P_O(S=s, D=d)``.
    """
    g = float(law.gamma[d, s])
    p = float(pm.obs.mass[d, s])
    if g < p - EPS_FEAS - pm.slack:
        raise DomainError(
            f"gamma[{d}][{s}] = {g:.6g} is below the observational mass {p:.6g}; "
            "the latent propensity would exceed 1"
        )
    if g <= 0.0:
        return 0.0
    return min(p / g, 1.0)


def data_box(pm: ProblemMoments, gamma: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise bounds the data put on ``m`` at the short-term laws *gamma*.

    ``m[d, s]`` lies in ``[mu * pi, mu * pi + 1 - pi]`` with ``mu`` the
    observed cell mean and ``pi`` the latent propensity.  A relaxed
    problem widens both sides by its slack.  Bounds are clipped to
    ``[0, 1]``.

    Returns:
        ``(lo, hi)``, each of shape ``(2, k)``.
    """
    pi = latent_propensities(pm, gamma)
    lo = pm.obs.mean * pi
    hi = lo + 1.0 - pi
    if pm.slack:
        lo = lo - pm.slack
        hi = hi + pm.slack
    return np.clip(lo, 0.0, 1.0), np.clip(hi, 0.0, 1.0)


def m_data_bounds(pm: ProblemMoments, law: ShortTermLaw, d: int) -> list[Interval]:
    """Data-implied interval for ``m[d, s]``, one per support point."""
    lo, hi = data_box(pm, law.gamma)
    return [Interval(float(a), float(b)) for a, b in zip(lo[d], hi[d], strict=True)]


def lte_value(m: np.ndarray, gamma: np.ndarray) -> float:
    """``sum_s m[1, s] gamma[1, s] - sum_s m[0, s] gamma[0, s]`` on raw arrays."""
    return float(m[1] @ gamma[1] - m[0] @ gamma[0])


def lte_functional(link: TemporalLink, law: ShortTermLaw) -> float:
    """The long-term effect implied by *link* and *law*, normalized scale."""
    return lte_value(link.m, law.gamma)


def constraint_count(k: int, use_cdc: bool) -> int:
    """Number of inequality constraints on the short-term laws.

    With the singleton core-determining class two arms contribute
    ``k - 1`` binding inequalities each; without it every nonempty
    subset of the support yields one, ``2 * 2**(k - 1)`` in all.
    """
    if k < 1:
        raise DomainError(f"k must be at least 1, got {k}")
    if use_cdc:
        return 2 * (k - 1)
    return 2 * 2 ** (k - 1)
