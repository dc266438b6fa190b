"""Tests for moment validation and identified-set membership."""

import numpy as np
import pytest

from ltebounds_core import (
    AssumptionSpec,
    ExperimentalMoments,
    ObservationalMoments,
    ProblemMoments,
    ShortTermLaw,
    SupportSpec,
    TemporalLink,
    data_box,
    gamma_lower_bounds,
    membership,
    validate_moments,
)
from ltebounds_testing import random_moments

TWO_POINT_GAMMA = ShortTermLaw([[0.7, 0.3], [0.3, 0.7]])


def _pm(obs_mass, obs_mean=None, exp_mass=None) -> ProblemMoments:
    obs_mass = np.asarray(obs_mass, dtype=float)
    mean = np.full_like(obs_mass, 0.5) if obs_mean is None else obs_mean
    exp = None if exp_mass is None else ExperimentalMoments(exp_mass)
    z_count = 1 if exp is None else exp.z_count
    return ProblemMoments(
        SupportSpec(k=obs_mass.shape[1], z_count=z_count),
        ObservationalMoments(obs_mass, mean),
        exp,
    )


class TestValidateMoments:
    def test_two_point_is_valid(self, two_point_moments):
        report = validate_moments(two_point_moments)
        assert report.ok
        assert report.issues == ()

    def test_observational_deficit(self):
        report = validate_moments(_pm([[0.3, 0.2], [0.2, 0.2]]))
        assert report.codes == {"obs-mass-sum"}
        assert report.messages == ["observational mass deficit 0.1"]

    def test_observational_excess(self):
        report = validate_moments(_pm([[0.3, 0.3], [0.3, 0.3]]))
        assert "observational mass excess 0.2" in report.messages

    def test_negative_mass_names_the_cell(self):
        report = validate_moments(_pm([[0.6, -0.1], [0.3, 0.2]]))
        assert "obs-negative-mass" in report.codes
        assert any("d=0, s=2" in m for m in report.messages)

    def test_mean_out_of_range(self):
        report = validate_moments(_pm([[0.25, 0.25], [0.25, 0.25]], [[0.5, 1.2], [0.5, 0.5]]))
        assert report.codes == {"obs-mean-range"}

    def test_experimental_block_sum_names_the_instrument(self):
        exp = [[[0.5, 0.5], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.4]]]
        report = validate_moments(_pm([[0.25, 0.25], [0.25, 0.25]], exp_mass=exp))
        assert report.codes == {"exp-mass-sum"}
        assert report.messages == ["experimental mass deficit 0.1 for z=2"]

    def test_experimental_negative_mass(self):
        exp = [[[0.6, 0.5], [-0.1, 0.0]]]
        report = validate_moments(_pm([[0.25, 0.25], [0.25, 0.25]], exp_mass=exp))
        assert "exp-negative-mass" in report.codes

    def test_gamma_infeasible_when_sources_disagree(self):
        exp = [[[0.1, 0.0], [0.0, 0.9]]]
        report = validate_moments(_pm([[0.35, 0.35], [0.3, 0.0]], exp_mass=exp))
        assert report.codes == {"gamma-infeasible"}
        assert report.messages == ["gamma infeasible for d=1: lower bounds sum to 1.2"]

    def test_reports_every_issue(self):
        exp = [[[0.1, 0.0], [0.0, 0.9]]]
        report = validate_moments(_pm([[0.35, 0.25], [0.3, 0.0]], exp_mass=exp))
        assert report.codes == {"obs-mass-sum", "gamma-infeasible"}

    def test_lower_bounds_fit_on_simulated_processes(self, rng):
        for k in (2, 3, 4):
            pm = random_moments(rng, k)
            assert validate_moments(pm).ok
            assert np.all(gamma_lower_bounds(pm).sum(axis=1) <= 1.0 + 1e-9)


class TestMembership:
    LUC_LINK = TemporalLink([[0.2, 0.4], [0.4, 0.7]])

    def test_two_point_luc_link_at_true_law(self, two_point_moments):
        assert membership(self.LUC_LINK, TWO_POINT_GAMMA, two_point_moments, AssumptionSpec.luc())

    def test_gamma_below_lower_bound(self, two_point_moments):
        law = ShortTermLaw([[0.7, 0.3], [0.8, 0.2]])
        assert not membership(self.LUC_LINK, law, two_point_moments, AssumptionSpec.worst_case())

    def test_law_must_be_a_probability_vector(self, two_point_moments):
        law = ShortTermLaw([[0.7, 0.4], [0.3, 0.7]])
        assert not membership(self.LUC_LINK, law, two_point_moments, AssumptionSpec.worst_case())

    def test_link_outside_data_box(self, two_point_moments):
        link = TemporalLink([[0.2, 0.4], [0.4, 0.95]])
        assert not membership(link, TWO_POINT_GAMMA, two_point_moments, AssumptionSpec.worst_case())

    def test_true_link_violates_luc(self, two_point_moments):
        """The true links are flat; the observed means are not."""
        link = TemporalLink([[0.3, 0.3], [0.5, 0.5]])
        assert membership(link, TWO_POINT_GAMMA, two_point_moments, AssumptionSpec.worst_case())
        assert not membership(link, TWO_POINT_GAMMA, two_point_moments, AssumptionSpec.luc())

    def test_box_midpoint_under_worst_case(self, random_instance, rng):
        lower = gamma_lower_bounds(random_instance)
        free = 1.0 - lower.sum(axis=1)
        for _ in range(20):
            gamma = lower + free[:, None] * rng.dirichlet(np.ones(random_instance.k), size=2)
            lo, hi = data_box(random_instance, gamma)
            assert membership(
                TemporalLink((lo + hi) / 2),
                ShortTermLaw(gamma),
                random_instance,
                AssumptionSpec.worst_case(),
            )

    def test_invariant_to_instrument_relabeling(self, two_point_moments):
        swapped = ProblemMoments(
            two_point_moments.support,
            two_point_moments.obs,
            two_point_moments.exp.relabeled([1, 0]),
        )
        worst = AssumptionSpec.worst_case()
        for law in (TWO_POINT_GAMMA, ShortTermLaw([[0.5, 0.5], [0.3, 0.7]])):
            assert membership(self.LUC_LINK, law, two_point_moments, worst) == membership(
                self.LUC_LINK, law, swapped, worst
            )

    def test_shape_mismatch_is_not_a_member(self, two_point_moments):
        link = TemporalLink(np.full((2, 3), 0.5))
        law = ShortTermLaw(np.full((2, 3), 1 / 3))
        assert not membership(link, law, two_point_moments, AssumptionSpec.worst_case())
