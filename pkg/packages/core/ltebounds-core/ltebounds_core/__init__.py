"""Sharp bounds on long-term treatment effects from short-term data.

An experiment measures a short-term outcome under (possibly imperfect)
compliance; an observational sample also measures the long-term
outcome.  This package computes the identified set of the long-term
average effect under a choice of modeling assumptions:

* :func:`solve_bounds` -- bounds from population moments.
* :class:`AssumptionSpec` -- worst case, ``liv``, ``ti``, ``liv-ti``,
  ``luc``, or a custom linear system on the link functions.
* :func:`validate_moments` and :func:`membership` -- checks on moments
  and on candidate pairs.
* :func:`plug_in_bounds` -- the same from finite samples, with
  :func:`feasibility_relaxation` when the samples admit no pair.
* :func:`grid_identified_set` and :func:`oracle_compare` -- brute-force
  certification of the solver on small problems.
* :func:`amplification_report`, :func:`manski_formula_bounds`,
  :func:`misspecification_distance`, :func:`luc_trivial_mean_check` --
  what each data source and assumption contributes.
* :class:`DgpSpec`, :func:`draw_samples` and :func:`consistency_study`
  -- simulation.
* :func:`get_logger` -- returns a logger in the shared ``ltebounds.*``
  namespace.
* :class:`LteBoundsError` -- base class for all library exceptions.

Install::

    pip install ltebounds-core
"""

from ltebounds_core.assumptions import (
    NO_CLOSED_FORM,
    AssumptionKind,
    AssumptionSpec,
    Direction,
    FiberDescription,
    LinearSystem,
    fiber_bounds,
    maximal_selector,
    minimal_selector,
    satisfies_assumption,
)
from ltebounds_core.dgp import DgpSpec, draw_samples, population_moments
from ltebounds_core.diagnostics import (
    AmplificationReport,
    FormulaBounds,
    LucCheck,
    amplification_report,
    luc_trivial_mean_check,
    manski_formula_bounds,
    misspecification_distance,
)
from ltebounds_core.estimation import (
    ExperimentalSample,
    ObservationalSample,
    empirical_moments,
    feasibility_relaxation,
    hausdorff_distance,
    plug_in_bounds,
)
from ltebounds_core.exceptions import (
    DomainError,
    EmptySetError,
    FiberEmptyError,
    InfeasibleError,
    LteBoundsError,
    ResolutionError,
)
from ltebounds_core.logging import LOGGER_NAMESPACE, get_logger
from ltebounds_core.moments import (
    EPS_FEAS,
    ExperimentalMoments,
    Interval,
    ObservationalMoments,
    ProblemMoments,
    ShortTermLaw,
    SupportSpec,
    TemporalLink,
    constraint_count,
    data_box,
    gamma_lower_bound,
    gamma_lower_bounds,
    latent_propensity,
    lte_functional,
    m_data_bounds,
)
from ltebounds_core.montecarlo import ConsistencyStudy, consistency_study
from ltebounds_core.oracle import (
    LIPSCHITZ,
    MAX_SUPPORT,
    CertificationReport,
    OracleResult,
    certify,
    grid_identified_set,
    oracle_compare,
)
from ltebounds_core.simplex import LpResult, LpStatus, solve_lp
from ltebounds_core.solver import (
    BoundsResult,
    Scope,
    Sense,
    SolverConfig,
    Status,
    TraceEntry,
    Witness,
    alternating_bilinear,
    constraint_set_nonempty,
    find_feasible_gamma,
    linear_gamma_program,
    outer_search,
    solve_bounds,
)
from ltebounds_core.validation import Issue, ValidationReport, membership, validate_moments

__all__ = [
    "EPS_FEAS",
    "LIPSCHITZ",
    "LOGGER_NAMESPACE",
    "MAX_SUPPORT",
    "NO_CLOSED_FORM",
    "AmplificationReport",
    "AssumptionKind",
    "AssumptionSpec",
    "BoundsResult",
    "CertificationReport",
    "ConsistencyStudy",
    "DgpSpec",
    "Direction",
    "DomainError",
    "EmptySetError",
    "ExperimentalMoments",
    "ExperimentalSample",
    "FiberDescription",
    "FiberEmptyError",
    "FormulaBounds",
    "InfeasibleError",
    "Interval",
    "Issue",
    "LinearSystem",
    "LpResult",
    "LpStatus",
    "LteBoundsError",
    "LucCheck",
    "ObservationalMoments",
    "ObservationalSample",
    "OracleResult",
    "ProblemMoments",
    "ResolutionError",
    "Scope",
    "Sense",
    "ShortTermLaw",
    "SolverConfig",
    "Status",
    "SupportSpec",
    "TemporalLink",
    "TraceEntry",
    "ValidationReport",
    "Witness",
    "alternating_bilinear",
    "amplification_report",
    "certify",
    "consistency_study",
    "constraint_count",
    "constraint_set_nonempty",
    "data_box",
    "draw_samples",
    "empirical_moments",
    "feasibility_relaxation",
    "fiber_bounds",
    "find_feasible_gamma",
    "gamma_lower_bound",
    "gamma_lower_bounds",
    "get_logger",
    "grid_identified_set",
    "hausdorff_distance",
    "latent_propensity",
    "linear_gamma_program",
    "lte_functional",
    "luc_trivial_mean_check",
    "m_data_bounds",
    "manski_formula_bounds",
    "maximal_selector",
    "membership",
    "minimal_selector",
    "misspecification_distance",
    "oracle_compare",
    "outer_search",
    "plug_in_bounds",
    "population_moments",
    "satisfies_assumption",
    "solve_bounds",
    "solve_lp",
    "validate_moments",
]
