"""Discrete data-generating processes for simulation and testing.

A :class:`DgpSpec` fixes the laws of the short-term potential outcomes,
the temporal links, observational selection on the latent short-term
outcome, and experimental compliance.  Links and means live on the
normalized outcome scale.

The experiment assigns ``Z`` uniformly and treats with probability
``treat_prob[z]``, independently of the potential outcomes.  The
observational sample selects arm ``d`` with probability
``propensity[d, s]`` given ``S(d) = s``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ltebounds_core.estimation import ExperimentalSample, ObservationalSample
from ltebounds_core.exceptions import DomainError
from ltebounds_core.moments import (
    EPS_FEAS,
    ExperimentalMoments,
    ObservationalMoments,
    ProblemMoments,
    SupportSpec,
    lte_value,
)


def _array(values: object, shape: tuple[int, ...], name: str) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.shape != shape:
        raise DomainError(f"{name} must have shape {shape}, got {array.shape}")
    if np.any(array < -EPS_FEAS) or np.any(array > 1.0 + EPS_FEAS):
        raise DomainError(f"{name} must lie in [0, 1]")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class DgpSpec:
    """A discrete data-generating process.

    Attributes:
        support: Support size, instrument count and outcome range.
        gamma: ``P(S(d) = s)``, shape ``(2, k)``.
        link: ``E[Y(d) | S(d) = s]``, shape ``(2, k)``.
        propensity: Observational ``P(D = d | S(d) = s)``, shape ``(2, k)``.
        observed_mean: ``E_O[Y | S = s, D = d]``, shape ``(2, k)``.
        treat_prob: Experimental ``P(D = 1 | Z = z)``, one per instrument value.
    """

    support: SupportSpec
    gamma: np.ndarray
    link: np.ndarray
    propensity: np.ndarray
    observed_mean: np.ndarray
    treat_prob: np.ndarray

    def __post_init__(self) -> None:
        shape = (2, self.support.k)
        gamma = _array(self.gamma, shape, "gamma")
        link = _array(self.link, shape, "link")
        propensity = _array(self.propensity, shape, "propensity")
        mean = _array(self.observed_mean, shape, "observed_mean")
        treat = _array(self.treat_prob, (self.support.z_count,), "treat_prob")

        if np.any(np.abs(gamma.sum(axis=1) - 1.0) > EPS_FEAS):
            raise DomainError(f"each row of gamma must sum to 1, got {gamma.sum(axis=1)}")
        total = float((propensity * gamma).sum())
        if abs(total - 1.0) > EPS_FEAS:
            raise DomainError(f"observational cell masses sum to {total:.6g}, not 1")
        unobserved = self.unobserved_mean_of(link, propensity, mean)
        if np.any(np.isnan(unobserved)):
            raise DomainError("a fully observed cell has link different from its observed mean")
        if np.any(unobserved < -EPS_FEAS) or np.any(unobserved > 1.0 + EPS_FEAS):
            raise DomainError("link and observed mean imply an unobserved mean outside [0, 1]")

        for name, value in (
            ("gamma", gamma),
            ("link", link),
            ("propensity", propensity),
            ("observed_mean", mean),
            ("treat_prob", treat),
        ):
            object.__setattr__(self, name, value)

    @staticmethod
    def unobserved_mean_of(
        link: np.ndarray, propensity: np.ndarray, mean: np.ndarray
    ) -> np.ndarray:
        """``(m - pi mu) / (1 - pi)`` per cell.

        Fully observed cells (``pi = 1``) give ``0`` when the link equals
        the observed mean and ``nan`` otherwise.
        """
        rest = link - propensity * mean
        closed = propensity >= 1.0 - EPS_FEAS
        out = np.divide(rest, 1.0 - propensity, out=np.zeros_like(rest), where=~closed)
        return np.where(closed & (np.abs(rest) > EPS_FEAS), np.nan, out)

    @property
    def k(self) -> int:
        return self.support.k

    @property
    def tau(self) -> float:
        """The long-term effect on the original outcome scale."""
        return lte_value(self.link, self.gamma) * self.support.scale


def population_moments(dgp: DgpSpec) -> ProblemMoments:
    """Exact moments of both data sources under *dgp*."""
    obs = ObservationalMoments(dgp.propensity * dgp.gamma, dgp.observed_mean)
    treat = dgp.treat_prob[:, None]
    exp = ExperimentalMoments(
        np.stack([(1.0 - treat) * dgp.gamma[0], treat * dgp.gamma[1]], axis=1)
    )
    return ProblemMoments(dgp.support, obs, exp)


def _draw_support(gamma: np.ndarray, d: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(gamma, axis=1)
    u = rng.random(d.size)
    index = (u[:, None] >= cdf[d]).sum(axis=1)
    return np.minimum(index, gamma.shape[1] - 1) + 1


def draw_samples(
    dgp: DgpSpec, n_obs: int, n_exp: int, rng: np.random.Generator
) -> tuple[ObservationalSample, ExperimentalSample]:
    """Draw i.i.d. samples from both data sources.

    Long-term outcomes are binary, ``y_low`` or ``y_high``, with the
    observed cell mean as success probability.

    Raises:
        DomainError: If a sample size is not positive.
    """
    if n_obs < 1 or n_exp < 1:
        raise DomainError(f"sample sizes must be positive, got {n_obs} and {n_exp}")
    k = dgp.k
    mass = (dgp.propensity * dgp.gamma).ravel()
    cells = rng.choice(2 * k, size=n_obs, p=mass / mass.sum())
    d_obs, s_obs = np.divmod(cells, k)
    success = rng.random(n_obs) < dgp.observed_mean[d_obs, s_obs]
    y = np.where(success, dgp.support.y_high, dgp.support.y_low)
    obs = ObservationalSample(y, s_obs + 1, d_obs)

    z = rng.integers(1, dgp.support.z_count + 1, size=n_exp)
    d_exp = (rng.random(n_exp) < dgp.treat_prob[z - 1]).astype(int)
    exp = ExperimentalSample(_draw_support(dgp.gamma, d_exp, rng), d_exp, z)
    return obs, exp
