"""Tests for data-generating processes."""

import numpy as np
import pytest

from ltebounds_core import (
    DgpSpec,
    DomainError,
    SupportSpec,
    draw_samples,
    empirical_moments,
    population_moments,
    validate_moments,
)
from ltebounds_testing import TWO_POINT_TAU, random_dgp

REFERENCE = {
    "support": SupportSpec(k=2, z_count=2),
    "gamma": [[0.7, 0.3], [0.3, 0.7]],
    "link": [[0.3, 0.3], [0.5, 0.5]],
    "propensity": [[3 / 7, 2 / 3], [2 / 3, 3 / 7]],
    "observed_mean": [[0.2, 0.4], [0.4, 0.7]],
    "treat_prob": [0.0, 1.0],
}


class TestDgpSpec:
    def test_tau(self, two_point_dgp):
        assert two_point_dgp.tau == pytest.approx(TWO_POINT_TAU)

    def test_tau_on_the_outcome_scale(self):
        dgp = DgpSpec(**{**REFERENCE, "support": SupportSpec(k=2, z_count=2, y_high=5.0)})
        assert dgp.tau == pytest.approx(1.0)

    def test_gamma_rows_must_sum_to_one(self):
        with pytest.raises(DomainError, match="each row of gamma"):
            DgpSpec(**{**REFERENCE, "gamma": [[0.7, 0.2], [0.3, 0.7]]})

    def test_selection_must_split_the_population(self):
        with pytest.raises(DomainError, match="observational cell masses sum"):
            DgpSpec(**{**REFERENCE, "propensity": [[0.5, 0.5], [0.5, 0.4]]})

    def test_unobserved_mean_must_be_a_mean(self):
        with pytest.raises(DomainError, match="unobserved mean outside"):
            DgpSpec(**{**REFERENCE, "link": [[0.3, 0.3], [0.5, 0.95]]})

    def test_values_must_be_probabilities(self):
        with pytest.raises(DomainError, match=r"treat_prob must lie in \[0, 1\]"):
            DgpSpec(**{**REFERENCE, "treat_prob": [0.0, 1.2]})

    def test_treat_prob_needs_one_entry_per_instrument_value(self):
        with pytest.raises(DomainError, match="treat_prob must have shape"):
            DgpSpec(**{**REFERENCE, "treat_prob": [0.5]})

    def test_unobserved_mean_of_fully_observed_cell(self):
        out = DgpSpec.unobserved_mean_of(
            np.array([[0.4, 0.5]]), np.array([[1.0, 1.0]]), np.array([[0.4, 0.6]])
        )
        assert out[0, 0] == 0.0
        assert np.isnan(out[0, 1])


class TestPopulationMoments:
    def test_worked_example(self, two_point_dgp):
        pm = population_moments(two_point_dgp)
        assert pm.obs.mass == pytest.approx([[0.3, 0.2], [0.2, 0.3]])
        assert pm.exp.mass[0] == pytest.approx([[0.7, 0.3], [0.0, 0.0]])
        assert pm.exp.mass[1] == pytest.approx([[0.0, 0.0], [0.3, 0.7]])

    def test_random_processes_give_valid_moments(self, rng):
        for k in (2, 3, 6):
            assert validate_moments(population_moments(random_dgp(rng, k))).ok


class TestDrawSamples:
    def test_codes_and_outcomes(self, two_point_dgp, rng):
        obs, exp = draw_samples(two_point_dgp, 500, 400, rng)
        assert len(obs) == 500
        assert len(exp) == 400
        assert set(np.unique(obs.y)) <= {0.0, 1.0}
        assert set(np.unique(obs.s)) <= {1, 2}
        assert set(np.unique(exp.z)) <= {1, 2}

    def test_compliance_follows_treat_prob(self, two_point_dgp, rng):
        _, exp = draw_samples(two_point_dgp, 10, 1000, rng)
        assert np.all(exp.d[exp.z == 1] == 0)
        assert np.all(exp.d[exp.z == 2] == 1)

    def test_large_samples_approach_the_population_moments(self, two_point_dgp, rng):
        obs, exp = draw_samples(two_point_dgp, 200_000, 200_000, rng)
        pm = empirical_moments(obs, exp, two_point_dgp.support)
        truth = population_moments(two_point_dgp)
        assert pm.obs.mass == pytest.approx(truth.obs.mass, abs=0.01)
        assert pm.obs.mean == pytest.approx(truth.obs.mean, abs=0.01)
        assert pm.exp.mass == pytest.approx(truth.exp.mass, abs=0.01)

    def test_same_seed_same_samples(self, two_point_dgp):
        first, _ = draw_samples(two_point_dgp, 50, 50, np.random.default_rng(3))
        second, _ = draw_samples(two_point_dgp, 50, 50, np.random.default_rng(3))
        assert np.array_equal(first.y, second.y)
        assert np.array_equal(first.s, second.s)

    def test_rejects_empty_sizes(self, two_point_dgp, rng):
        with pytest.raises(DomainError, match="sample sizes must be positive"):
            draw_samples(two_point_dgp, 0, 10, rng)
