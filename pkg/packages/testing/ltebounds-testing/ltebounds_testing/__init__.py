"""Reference instances and pytest fixtures for ltebounds.

* :func:`two_point_dgp` and :func:`two_point_moments` -- the worked
  example, with hand-derived bounds in :data:`TWO_POINT_BOUNDS`.
* :func:`random_dgp` and :func:`random_moments` -- random valid
  instances, optionally satisfying an assumption.
* :func:`sample_fiber_points` -- random link functions in a fiber.
* :func:`exact_samples` -- samples whose empirical moments are exact.

Installing the package registers the fixtures ``two_point_moments``,
``two_point_dgp``, ``rng`` and ``random_instance`` with pytest.
"""

from ltebounds_testing.fixtures import RNG_SEED
from ltebounds_testing.instances import (
    TWO_POINT_BOUNDS,
    TWO_POINT_TAU,
    exact_samples,
    random_dgp,
    random_moments,
    sample_fiber_points,
    two_point_dgp,
    two_point_moments,
)

__all__ = [
    "RNG_SEED",
    "TWO_POINT_BOUNDS",
    "TWO_POINT_TAU",
    "exact_samples",
    "random_dgp",
    "random_moments",
    "sample_fiber_points",
    "two_point_dgp",
    "two_point_moments",
]
