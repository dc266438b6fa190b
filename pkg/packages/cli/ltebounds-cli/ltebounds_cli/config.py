"""Pydantic schemas for the files the command line reads.

Four documents, all YAML:

* :class:`MomentsDocument` -- population moments, one entry per cell.
* :class:`DgpDocument` -- a data-generating process for ``simulate``.
* :class:`CustomSystemDocument` -- linear restrictions for the
  ``custom`` assumption.
* :class:`RunConfig` -- defaults for every command, passed with
  ``--config``.  Flags given on the command line win.

Example moments file (the worked example)::

    format: lte-moments/1
    k: 2
    z_count: 2
    observational:
      - {s: 1, d: 0, mass: 0.3, mean: 0.2}
      - {s: 2, d: 0, mass: 0.2, mean: 0.4}
      - {s: 1, d: 1, mass: 0.2, mean: 0.4}
      - {s: 2, d: 1, mass: 0.3, mean: 0.7}
    experimental:
      - {z: 1, s: 1, d: 0, mass: 0.7}
      - {z: 1, s: 2, d: 0, mass: 0.3}
      - {z: 2, s: 1, d: 1, mass: 0.3}
      - {z: 2, s: 2, d: 1, mass: 0.7}

Support points and instrument values are 1-based.  Means are on the
original outcome scale, ``[y_low, y_high]``.  Cells that are not listed
have mass ``0``; a file with no experimental cells describes an
observational sample alone.
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ltebounds_cli.exceptions import CliError
from ltebounds_cli.samples import BinningMode, DiscretizationSpec
from ltebounds_core import (
    AssumptionKind,
    AssumptionSpec,
    DgpSpec,
    Direction,
    ExperimentalMoments,
    LinearSystem,
    ObservationalMoments,
    ProblemMoments,
    Scope,
    SolverConfig,
    SupportSpec,
)

MOMENTS_FORMAT = "lte-moments/1"
DGP_FORMAT = "lte-dgp/1"

Arm = Literal[0, 1]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ObservationalCell(_Strict):
    """One ``(s, d)`` cell of the observational sample."""

    s: int = Field(..., ge=1, description="Short-term support point, 1-based")
    d: Arm = Field(..., description="Treatment arm")
    mass: float = Field(..., ge=0.0, le=1.0, description="P_O(S = s, D = d)")
    mean: float = Field(0.0, description="E_O[Y | S = s, D = d], original scale")


class ExperimentalCell(_Strict):
    """One ``(z, s, d)`` cell of the experimental sample."""

    z: int = Field(..., ge=1, description="Instrument value, 1-based")
    s: int = Field(..., ge=1, description="Short-term support point, 1-based")
    d: Arm = Field(..., description="Realized treatment arm")
    mass: float = Field(..., ge=0.0, le=1.0, description="P_E(S = s, D = d | Z = z)")


class MomentsDocument(_Strict):
    """A moments file.

    Attributes:
        format: Always ``lte-moments/1``.
        k: Number of short-term support points.
        z_count: Number of experimental instrument values.
        y_low: Lower end of the long-term outcome range.
        y_high: Upper end of the long-term outcome range.
        observational: Observational cells with positive mass.
        experimental: Experimental cells with positive mass.
    """

    format: Literal["lte-moments/1"]
    k: int = Field(..., ge=1)
    z_count: int = Field(1, ge=1)
    y_low: float = 0.0
    y_high: float = 1.0
    observational: list[ObservationalCell] = Field(..., min_length=1)
    experimental: list[ExperimentalCell] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_cells(self) -> MomentsDocument:
        if not self.y_low < self.y_high:
            raise ValueError(f"y_low ({self.y_low}) must be below y_high ({self.y_high})")
        seen: set[tuple[int, ...]] = set()
        for cell in self.observational:
            if cell.s > self.k:
                raise ValueError(f"observational cell s = {cell.s} exceeds k = {self.k}")
            if (cell.s, cell.d) in seen:
                raise ValueError(f"observational cell (s={cell.s}, d={cell.d}) is listed twice")
            seen.add((cell.s, cell.d))
        for entry in self.experimental:
            if entry.s > self.k:
                raise ValueError(f"experimental cell s = {entry.s} exceeds k = {self.k}")
            if entry.z > self.z_count:
                raise ValueError(
                    f"experimental cell z = {entry.z} exceeds z_count = {self.z_count}"
                )
            if (entry.z, entry.s, entry.d) in seen:
                raise ValueError(
                    f"experimental cell (z={entry.z}, s={entry.s}, d={entry.d}) is listed twice"
                )
            seen.add((entry.z, entry.s, entry.d))
        return self

    def to_moments(self) -> ProblemMoments:
        support = SupportSpec(self.k, self.z_count, self.y_low, self.y_high)
        mass = np.zeros((2, self.k))
        mean = np.zeros((2, self.k))
        for cell in self.observational:
            mass[cell.d, cell.s - 1] = cell.mass
            mean[cell.d, cell.s - 1] = cell.mean
        observational = ObservationalMoments(mass, support.normalize(mean))
        experimental = None
        if self.experimental:
            blocks = np.zeros((self.z_count, 2, self.k))
            for entry in self.experimental:
                blocks[entry.z - 1, entry.d, entry.s - 1] = entry.mass
            experimental = ExperimentalMoments(blocks)
        return ProblemMoments(support, observational, experimental)

    @classmethod
    def from_moments(cls, pm: ProblemMoments) -> MomentsDocument:
        """Describe *pm*, listing only cells with positive mass.

        The relaxation slack is not part of the file.
        """
        support = pm.support
        observational = [
            ObservationalCell(
                s=s + 1,
                d=d,
                mass=float(pm.obs.mass[d, s]),
                mean=float(support.y_low + pm.obs.mean[d, s] * support.scale),
            )
            for d, s in np.ndindex(2, pm.k)
            if pm.obs.mass[d, s] > 0.0
        ]
        experimental = []
        if pm.exp is not None:
            experimental = [
                ExperimentalCell(z=z + 1, s=s + 1, d=d, mass=float(pm.exp.mass[z, d, s]))
                for z, d, s in np.ndindex(pm.exp.mass.shape)
                if pm.exp.mass[z, d, s] > 0.0
            ]
        return cls(
            format=MOMENTS_FORMAT,
            k=pm.k,
            z_count=support.z_count,
            y_low=support.y_low,
            y_high=support.y_high,
            observational=observational,
            experimental=experimental,
        )


class DgpDocument(_Strict):
    """A data-generating process for ``simulate``.

    Every ``(2, k)`` table is two rows, ``d = 0`` then ``d = 1``.  Links
    and observed means are on the original outcome scale.
    """

    format: Literal["lte-dgp/1"]
    k: int = Field(..., ge=1)
    z_count: int = Field(1, ge=1)
    y_low: float = 0.0
    y_high: float = 1.0
    gamma: list[list[float]] = Field(..., description="P(S(d) = s)")
    link: list[list[float]] = Field(..., description="E[Y(d) | S(d) = s]")
    propensity: list[list[float]] = Field(..., description="P_O(D = d | S(d) = s)")
    observed_mean: list[list[float]] = Field(..., description="E_O[Y | S = s, D = d]")
    treat_prob: list[float] = Field(..., description="P_E(D = 1 | Z = z)")

    @model_validator(mode="after")
    def _check_tables(self) -> DgpDocument:
        for name in ("gamma", "link", "propensity", "observed_mean"):
            rows = getattr(self, name)
            if len(rows) != 2 or any(len(row) != self.k for row in rows):
                raise ValueError(f"{name} must be two rows of k = {self.k} values")
        return self

    def to_dgp(self) -> DgpSpec:
        support = SupportSpec(self.k, self.z_count, self.y_low, self.y_high)
        return DgpSpec(
            support=support,
            gamma=self.gamma,
            link=support.normalize(np.array(self.link)),
            propensity=self.propensity,
            observed_mean=support.normalize(np.array(self.observed_mean)),
            treat_prob=self.treat_prob,
        )


class LinearRow(_Strict):
    """``coefficients @ v >= rhs``, or ``==`` among the equalities."""

    coefficients: list[float]
    rhs: float


class CustomSystemDocument(_Strict):
    """Linear restrictions on the link functions.

    ``v`` is ``(m0(1), ..., m0(k), m1(1), ..., m1(k))`` on the normalized
    ``[0, 1]`` outcome scale.
    """

    k: int = Field(..., ge=1)
    inequalities: list[LinearRow] = Field(default_factory=list)
    equalities: list[LinearRow] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_rows(self) -> CustomSystemDocument:
        if not self.inequalities and not self.equalities:
            raise ValueError("a custom system needs at least one row")
        for row in self.inequalities + self.equalities:
            if len(row.coefficients) != 2 * self.k:
                raise ValueError(
                    f"every row needs 2k = {2 * self.k} coefficients, "
                    f"got {len(row.coefficients)}"
                )
        return self

    def to_system(self) -> LinearSystem:
        def split(rows: list[LinearRow]) -> tuple[list[list[float]] | None, list[float] | None]:
            if not rows:
                return None, None
            return [row.coefficients for row in rows], [row.rhs for row in rows]

        a_ineq, b_ineq = split(self.inequalities)
        a_eq, b_eq = split(self.equalities)
        return LinearSystem(self.k, a_ineq, b_ineq, a_eq, b_eq)


class DiscretizationDocument(_Strict):
    """How ``estimate`` maps a raw short-term outcome onto support points."""

    mode: BinningMode
    edges: list[float] = Field(default_factory=list)
    q: int | None = Field(None, ge=2)
    order: Direction = Direction.INCREASING

    @model_validator(mode="after")
    def _check_mode(self) -> DiscretizationDocument:
        if self.mode is BinningMode.QUANTILE and self.q is None:
            raise ValueError("quantile discretization needs q")
        if self.mode is BinningMode.EXPLICIT and not self.edges:
            raise ValueError("explicit discretization needs edges")
        return self

    def to_spec(self) -> DiscretizationSpec:
        if self.q is not None and self.mode is BinningMode.QUANTILE:
            return DiscretizationSpec.quantile(self.q, self.order)
        return DiscretizationSpec.explicit(self.edges, self.order)


class SolverSettings(_Strict):
    """Overrides for :class:`~ltebounds_core.SolverConfig`; unset fields keep its defaults."""

    multistarts: int | None = None
    grid_refinements: int | None = None
    step_init: float | None = None
    tol_obj: float | None = None
    seed: int | None = None
    max_alternations: int | None = None
    max_vertex_starts: int | None = None


class RunConfig(_Strict):
    """Defaults for every command.

    Attributes:
        assumption: Maintained assumption.
        direction: Monotonicity direction for ``liv`` and ``liv-ti``.
        system: Custom system file, relative to the config file.
        scope: Use the experiment, or the observational data alone.
        solver: Solver tuning.
        covariates: Columns that define the cells ``estimate`` bounds
            separately.
        weights: Cell weights keyed by cell label, e.g. ``"x=1"``.
            Defaults to observational cell frequencies.
        discretization: How ``estimate`` bins the short-term outcome;
            ``None`` reads it as integer codes ``1..k``.
        clip: Clip sample outcomes to ``[y_low, y_high]``.
        y_low: Outcome range for ``estimate``; defaults to the sample range.
        y_high: Outcome range for ``estimate``; defaults to the sample range.
        resolution: Lattice resolution for ``oracle``.
        workers: Worker processes for per-cell runs.
        format: Output format.
    """

    assumption: AssumptionKind = AssumptionKind.WORST_CASE
    direction: Direction = Direction.INCREASING
    system: Path | None = None
    scope: Scope = Scope.COMBINED
    solver: SolverSettings = Field(default_factory=SolverSettings)
    covariates: list[str] = Field(default_factory=list)
    weights: dict[str, float] | None = None
    discretization: DiscretizationDocument | None = None
    clip: bool = False
    y_low: float | None = None
    y_high: float | None = None
    resolution: int = Field(400, ge=10)
    workers: int = Field(1, ge=1)
    format: Literal["text", "json"] = "text"

    @field_validator("weights")
    @classmethod
    def _nonnegative(cls, weights: dict[str, float] | None) -> dict[str, float] | None:
        if weights is not None:
            negative = sorted(label for label, weight in weights.items() if weight < 0.0)
            if negative:
                raise ValueError(f"weights must be nonnegative: {', '.join(negative)}")
        return weights

    def solver_config(self) -> SolverConfig:
        return SolverConfig(scope=self.scope, **self.solver.model_dump(exclude_none=True))


def build_assumption(
    kind: AssumptionKind, direction: Direction, system: LinearSystem | None = None
) -> AssumptionSpec:
    """Turn a kind, a direction and an optional system into an assumption.

    ``direction`` is ignored for kinds without one.
    """
    if kind is AssumptionKind.CUSTOM:
        if system is None:
            raise CliError("the custom assumption needs a system file")
        return AssumptionSpec.custom(system)
    if system is not None:
        raise CliError(f"a system file only applies to the custom assumption, not {kind}")
    return AssumptionSpec(kind, direction)
