"""Monte Carlo check that the plug-in bounds converge.

Each replication draws fresh samples at every size from its own seed,
spawned from the base seed with :class:`numpy.random.SeedSequence`, so
results do not depend on the worker count.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ltebounds_core.assumptions import AssumptionSpec
from ltebounds_core.dgp import DgpSpec, draw_samples, population_moments
from ltebounds_core.estimation import hausdorff_distance, plug_in_bounds
from ltebounds_core.exceptions import DomainError
from ltebounds_core.logging import get_logger
from ltebounds_core.moments import Interval
from ltebounds_core.solver import SolverConfig, solve_bounds

_logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class ConsistencyStudy:
    """Distances of plug-in bounds from the population bounds.

    Attributes:
        target: Population bounds, original scale.
        sizes: Sample sizes, shared by both data sources.
        distances: Hausdorff distances, shape ``(replications, sizes)``,
            normalized scale.
    """

    target: Interval
    sizes: tuple[int, ...]
    distances: np.ndarray

    @property
    def medians(self) -> np.ndarray:
        return np.median(self.distances, axis=0)

    @property
    def strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.medians) < 0.0))


_Task = tuple[
    DgpSpec, AssumptionSpec, SolverConfig, Interval, tuple[int, ...], np.random.SeedSequence
]


def _replicate(task: _Task) -> list[float]:
    dgp, a, cfg, target, sizes, seed = task
    rng = np.random.default_rng(seed)
    distances = []
    for n in sizes:
        obs, exp = draw_samples(dgp, n, n, rng)
        estimate = plug_in_bounds(obs, exp, dgp.support, a, cfg).normalized
        distances.append(hausdorff_distance(estimate, target))
    return distances


def consistency_study(
    dgp: DgpSpec,
    a: AssumptionSpec,
    cfg: SolverConfig | None = None,
    *,
    sizes: tuple[int, ...] = (500, 5_000, 50_000),
    replications: int = 50,
    seed: int = 0,
    workers: int = 1,
) -> ConsistencyStudy:
    """Median Hausdorff distance of the plug-in bounds at each sample size.

    Args:
        dgp: Process to sample from.
        a: Maintained assumption.
        cfg: Solver configuration.
        sizes: Sample sizes, increasing.
        replications: Independent replications per size.
        seed: Base seed.
        workers: Worker processes; ``1`` runs in this process.

    Raises:
        DomainError: On empty or non-increasing sizes, or fewer than one
            replication or worker.
    """
    if not sizes or any(later <= earlier for earlier, later in itertools.pairwise(sizes)):
        raise DomainError(f"sizes must be nonempty and increasing, got {sizes}")
    if replications < 1 or workers < 1:
        raise DomainError("replications and workers must be at least 1")
    cfg = cfg or SolverConfig()
    target = solve_bounds(population_moments(dgp), a, cfg)
    if not target.feasible:
        raise DomainError(f"population constraint set is empty under {a.label}")

    tasks = [
        (dgp, a, cfg, target.normalized, tuple(sizes), child)
        for child in np.random.SeedSequence(seed).spawn(replications)
    ]
    _logger.info(
        "consistency study under %s: %d replications at sizes %s on %d workers",
        a.label,
        replications,
        sizes,
        workers,
    )
    if workers == 1:
        rows = [_replicate(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(_replicate, tasks))
    return ConsistencyStudy(target.interval, tuple(sizes), np.array(rows))
