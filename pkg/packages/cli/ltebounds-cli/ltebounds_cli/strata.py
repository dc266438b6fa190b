"""Bounds per covariate cell, and their weighted combination.

The effect in the population is a weighted sum of the cell effects.
With no restriction across cells, the bounds on that sum are the same
weighted sums of the cell endpoints.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ltebounds_cli.samples import SampleData
from ltebounds_core import (
    AssumptionSpec,
    BoundsResult,
    DomainError,
    ExperimentalSample,
    Interval,
    ObservationalSample,
    SolverConfig,
    Status,
    SupportSpec,
    get_logger,
    plug_in_bounds,
)

_logger = get_logger(__name__)

#: Label of the single cell when no covariates are given.
ALL_RECORDS = "all"

# Worst status first.
_PRECEDENCE = (Status.INFEASIBLE, Status.RELAXED, Status.LOCAL_SEARCH, Status.EXACT)

_WEIGHT_TOL = 1e-9


@dataclass(frozen=True)
class CellBounds:
    """Plug-in bounds for one covariate cell.

    Attributes:
        label: Cell label such as ``"x=1,g=b"``.
        weight: Weight of the cell in the combination.
        n_obs: Observational records in the cell.
        n_exp: Experimental records in the cell.
        result: The cell's bounds.
    """

    label: str
    weight: float
    n_obs: int
    n_exp: int
    result: BoundsResult


@dataclass(frozen=True)
class StratifiedResult:
    """Weighted combination of per-cell bounds.

    Attributes:
        interval: Combined bounds on the original outcome scale; empty if
            any cell is infeasible.
        status: The worst cell status.
        assumption: The maintained assumption.
        cells: Per-cell rows, in label order.
        covariates: Columns that define the cells.
    """

    interval: Interval
    status: Status
    assumption: AssumptionSpec
    cells: tuple[CellBounds, ...]
    covariates: tuple[str, ...] = ()

    @property
    def feasible(self) -> bool:
        return self.status is not Status.INFEASIBLE

    @property
    def relaxation(self) -> float:
        return max((cell.result.relaxation for cell in self.cells), default=0.0)


def row_labels(frame: pd.DataFrame | None, covariates: Sequence[str], size: int) -> np.ndarray:
    """Cell label of each of *size* records, ``"name=value"`` pairs joined by commas."""
    if not covariates:
        return np.full(size, ALL_RECORDS, dtype=object)
    if frame is None:
        raise DomainError(f"samples were read without covariate columns {list(covariates)}")
    labels = f"{covariates[0]}=" + frame[covariates[0]].astype(str)
    for name in covariates[1:]:
        labels = labels + f",{name}=" + frame[name].astype(str)
    return labels.to_numpy(dtype=object)


def _weights(
    labels: list[str], counts: list[int], weights: Mapping[str, float] | None
) -> list[float]:
    if weights is None:
        total = sum(counts)
        return [count / total for count in counts]
    missing = [label for label in labels if label not in weights]
    if missing:
        raise DomainError(f"no weight for cell(s) {', '.join(missing)}")
    chosen = [float(weights[label]) for label in labels]
    if any(weight < 0.0 for weight in chosen):
        raise DomainError("cell weights must be nonnegative")
    if abs(math.fsum(chosen) - 1.0) > _WEIGHT_TOL:
        raise DomainError(f"cell weights sum to {math.fsum(chosen):.6g} over the cells present")
    ignored = sorted(set(weights) - set(labels))
    if ignored:
        _logger.warning("ignoring weights for cells with no records: %s", ", ".join(ignored))
    return chosen


_Task = tuple[
    ObservationalSample,
    ExperimentalSample | None,
    SupportSpec,
    AssumptionSpec,
    SolverConfig,
    bool,
]


def _solve(task: _Task) -> BoundsResult:
    obs, exp, support, a, cfg, clip = task
    return plug_in_bounds(obs, exp, support, a, cfg, clip=clip)


def stratified_bounds(
    data: SampleData,
    a: AssumptionSpec,
    cfg: SolverConfig | None = None,
    *,
    covariates: Sequence[str] = (),
    weights: Mapping[str, float] | None = None,
    clip: bool = False,
    workers: int = 1,
) -> StratifiedResult:
    """Plug-in bounds in each covariate cell, combined by weight.

    Cells are the distinct covariate values among the observational
    records.  Experimental records in a cell with no observational
    records are dropped; a cell with no experimental records is bounded
    from its observational records alone.

    Args:
        data: Samples from :func:`~ltebounds_cli.samples.load_samples`,
            read with the same covariate columns.
        a: Maintained assumption.
        cfg: Solver configuration.
        covariates: Columns that define the cells; none gives one cell.
        weights: Weight per cell label; defaults to observational cell
            frequencies.  Must be nonnegative and sum to one over the
            cells present.
        clip: Clip outcomes to the outcome range.
        workers: Worker processes; ``1`` runs in this process.

    Raises:
        DomainError: On bad weights or fewer than one worker.
    """
    if workers < 1:
        raise DomainError(f"workers must be at least 1, got {workers}")
    cfg = cfg or SolverConfig()
    covariates = list(covariates)
    obs_labels = row_labels(data.obs_covariates, covariates, len(data.obs))
    exp_labels = None
    if data.exp is not None:
        exp_labels = row_labels(data.exp_covariates, covariates, len(data.exp))
    labels = sorted(set(obs_labels.tolist()))

    if exp_labels is not None:
        orphans = int((~np.isin(exp_labels, labels)).sum())
        if orphans:
            _logger.warning(
                "dropping %d experimental records in cells with no observational records",
                orphans,
            )

    tasks: list[_Task] = []
    sizes: list[tuple[int, int]] = []
    for label in labels:
        obs = data.obs.subset(obs_labels == label)
        exp = None
        if data.exp is not None and exp_labels is not None:
            exp = data.exp.subset(exp_labels == label)
            if len(exp) == 0:
                _logger.warning("cell %s has no experimental records", label)
                exp = None
        tasks.append((obs, exp, data.support, a, cfg, clip))
        sizes.append((len(obs), 0 if exp is None else len(exp)))

    chosen = _weights(labels, [n_obs for n_obs, _ in sizes], weights)
    _logger.info("bounding %d cell(s) under %s on %d worker(s)", len(tasks), a.label, workers)
    if workers == 1 or len(tasks) == 1:
        results = [_solve(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_solve, tasks))

    cells = tuple(
        CellBounds(label, weight, n_obs, n_exp, result)
        for label, weight, (n_obs, n_exp), result in zip(
            labels, chosen, sizes, results, strict=True
        )
    )
    status = next(s for s in _PRECEDENCE if any(c.result.status is s for c in cells))
    if status is Status.INFEASIBLE:
        interval = Interval.empty_set()
    else:
        interval = Interval(
            math.fsum(c.weight * c.result.interval.lo for c in cells),
            math.fsum(c.weight * c.result.interval.hi for c in cells),
        )
    return StratifiedResult(interval, status, a, cells, tuple(covariates))
