"""Pytest fixtures, registered automatically as a plugin.

Installing ``ltebounds-testing`` makes these available in any test
without an import or a ``conftest.py`` entry, via the ``pytest11``
entry point.
"""

from __future__ import annotations

import numpy as np
import pytest

from ltebounds_core import DgpSpec, ProblemMoments
from ltebounds_testing.instances import random_moments, two_point_dgp, two_point_moments

#: Seed of the :func:`rng` fixture.
RNG_SEED = 20240611


@pytest.fixture(name="two_point_moments")
def two_point_moments_fixture() -> ProblemMoments:
    """Population moments of the worked example."""
    return two_point_moments()


@pytest.fixture(name="two_point_dgp")
def two_point_dgp_fixture() -> DgpSpec:
    """The worked example as a data-generating process."""
    return two_point_dgp()


@pytest.fixture
def rng() -> np.random.Generator:
    """A freshly seeded generator, the same in every test."""
    return np.random.default_rng(RNG_SEED)


@pytest.fixture
def random_instance(rng: np.random.Generator) -> ProblemMoments:
    """Population moments of a random three-point process."""
    return random_moments(rng, 3)
