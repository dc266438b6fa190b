"""Argument parsing and dispatch for the ``ltebounds`` command.

Exit codes:

* ``0`` -- the command ran; for ``oracle``, the solver passed.
* ``1`` -- ``oracle`` ran and the solver failed certification.
* ``2`` -- the identified set is empty.
* ``3`` -- the command could not run: a missing or malformed file, a
  schema violation, an argument outside its domain, a usage error.

An empty identified set is a finding about the data and the assumption,
so it is kept apart from a broken invocation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path
from typing import NoReturn, TextIO

import numpy as np

from ltebounds_cli.config import RunConfig, build_assumption
from ltebounds_cli.exceptions import CliError
from ltebounds_cli.files import load_dgp, load_moments, load_run_config, load_system, write_samples
from ltebounds_cli.render import (
    Diagnosis,
    discretization_note,
    fmt,
    plural,
    render_json,
    render_report,
)
from ltebounds_cli.samples import DiscretizationSpec, load_samples
from ltebounds_cli.strata import stratified_bounds
from ltebounds_core import (
    LOGGER_NAMESPACE,
    AssumptionKind,
    AssumptionSpec,
    Direction,
    LteBoundsError,
    ProblemMoments,
    Scope,
    SolverConfig,
    amplification_report,
    certify,
    draw_samples,
    grid_identified_set,
    luc_trivial_mean_check,
    manski_formula_bounds,
    plug_in_bounds,
    solve_bounds,
    validate_moments,
)
from ltebounds_core.solver import scoped_moments

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INFEASIBLE = 2
EXIT_ERROR = 3

# Well-formed moments whose sources disagree: the identified set is empty.
_INCOMPATIBLE = frozenset({"gamma-infeasible"})


class _Parser(argparse.ArgumentParser):
    """Exits with :data:`EXIT_ERROR` on a usage error instead of argparse's ``2``."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _edges(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got {text!r}"
        ) from None


def _names(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    """Build the ``ltebounds`` argument parser."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        help="Print the library's debug logs to stderr.",
    )
    common.add_argument(
        "--config",
        type=Path,
        metavar="FILE",
        help="YAML run config; flags on the command line override it.",
    )
    common.add_argument(
        "--format",
        choices=["text", "json"],
        help="Output format (default: text).",
    )

    assumed = argparse.ArgumentParser(add_help=False)
    assumed.add_argument(
        "--assumption",
        type=AssumptionKind,
        choices=list(AssumptionKind),
        help="Maintained assumption (default: worst-case).",
    )
    assumed.add_argument(
        "--direction",
        type=Direction,
        choices=list(Direction),
        help="Monotonicity direction for liv and liv-ti (default: increasing).",
    )
    assumed.add_argument(
        "--system",
        type=Path,
        metavar="FILE",
        help="Linear restrictions for the custom assumption.",
    )
    assumed.add_argument(
        "--scope",
        type=Scope,
        choices=list(Scope),
        help="Use the experiment, or the observational data alone (default: combined).",
    )
    assumed.add_argument("--seed", type=int, help="Seed for the solver's random starts.")
    assumed.add_argument(
        "--multistarts",
        type=_positive,
        metavar="N",
        help="Random starting laws per search.",
    )

    moments = argparse.ArgumentParser(add_help=False)
    moments.add_argument(
        "--moments",
        type=Path,
        required=True,
        metavar="FILE",
        help="Population moments (lte-moments/1).",
    )

    parser = _Parser(
        prog="ltebounds",
        description="Bound long-term treatment effects from short-term data.",
        parents=[common],
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    subparsers.add_parser(
        "bounds",
        parents=[common, assumed, moments],
        help="Bounds from population moments.",
        description="Compute the identified set of the long-term effect from a moments file.",
    )

    estimate = subparsers.add_parser(
        "estimate",
        parents=[common, assumed],
        help="Plug-in bounds from samples.",
        description=(
            "Estimate the bounds from an observational and an experimental sample, "
            "optionally per covariate cell."
        ),
    )
    estimate.add_argument(
        "--obs", type=Path, required=True, metavar="FILE", help="Observational CSV: y, s, d."
    )
    estimate.add_argument("--exp", type=Path, metavar="FILE", help="Experimental CSV: s, d, z.")
    binning = estimate.add_mutually_exclusive_group()
    binning.add_argument(
        "--edges",
        type=_edges,
        metavar="E1,E2,...",
        help="Discretize s at these edges; a value on an edge goes to the lower bin.",
    )
    binning.add_argument(
        "--quantiles",
        type=_positive,
        metavar="Q",
        help="Discretize s into Q bins at pooled quantiles.",
    )
    estimate.add_argument(
        "--order",
        type=Direction,
        choices=list(Direction),
        help="With decreasing, support point 1 holds the largest values of s.",
    )
    estimate.add_argument(
        "--covariates",
        type=_names,
        metavar="X1,X2,...",
        help="Bound each covariate cell separately and combine by cell frequency.",
    )
    estimate.add_argument("--y-low", type=float, help="Outcome range (default: sample minimum).")
    estimate.add_argument("--y-high", type=float, help="Outcome range (default: sample maximum).")
    estimate.add_argument(
        "--clip",
        action="store_true",
        default=None,
        help="Clip outcomes to the range instead of failing.",
    )
    estimate.add_argument(
        "--workers", type=_positive, metavar="N", help="Worker processes for per-cell runs."
    )

    diagnose = subparsers.add_parser(
        "diagnose",
        parents=[common, assumed, moments],
        help="What the experiment and the assumption contribute.",
        description=(
            "Compare worst-case and restricted bounds with and without the experiment, "
            "and cross-check the worst case against its closed form."
        ),
    )
    diagnose.add_argument(
        "--tau",
        type=float,
        help="A hypothesized true effect; reports each interval's distance to it.",
    )

    oracle = subparsers.add_parser(
        "oracle",
        parents=[common, assumed, moments],
        help="Certify the solver by brute force.",
        description="Compare solver bounds with a lattice enumeration. Support size 4 or less.",
    )
    oracle.add_argument(
        "--resolution",
        type=_positive,
        metavar="N",
        help="Lattice points per unit mass (default: 400).",
    )

    simulate = subparsers.add_parser(
        "simulate",
        parents=[common],
        help="Draw samples from a data-generating process.",
        description="Write observational.csv and experimental.csv drawn from a DGP file.",
    )
    simulate.add_argument(
        "--dgp", type=Path, required=True, metavar="FILE", help="Process file (lte-dgp/1)."
    )
    simulate.add_argument(
        "--n", type=_positive, required=True, metavar="N", help="Observational records."
    )
    simulate.add_argument(
        "--n-exp", type=_positive, metavar="N", help="Experimental records (default: --n)."
    )
    simulate.add_argument("--seed", type=int, default=0, help="Sampling seed (default: 0).")
    simulate.add_argument(
        "--out-dir",
        type=Path,
        default=Path("."),
        help="Directory for the sample files (default: the working directory).",
    )

    return parser


@contextmanager
def _debug_logging(enabled: bool) -> Iterator[None]:
    """Send the library's own logs to stderr for the duration, leaving stdout parseable."""
    if not enabled:
        yield
        return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    logger = logging.getLogger(LOGGER_NAMESPACE)
    level = logger.level
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG)
    try:
        yield
    finally:
        logger.removeHandler(handler)
        logger.setLevel(level)


_OVERRIDES = (
    "assumption",
    "direction",
    "system",
    "scope",
    "format",
    "covariates",
    "y_low",
    "y_high",
    "clip",
    "workers",
    "resolution",
)


def _settings(args: argparse.Namespace) -> RunConfig:
    """The run config file, if any, with the flags that were given laid over it."""
    config = load_run_config(args.config) if args.config else RunConfig()
    updates = {
        name: getattr(args, name)
        for name in _OVERRIDES
        if getattr(args, name, None) is not None
    }
    solver = {
        name: getattr(args, name)
        for name in ("seed", "multistarts")
        if args.command != "simulate" and getattr(args, name, None) is not None
    }
    if solver:
        updates["solver"] = config.solver.model_copy(update=solver)
    return config.model_copy(update=updates)


def _assumption(settings: RunConfig) -> AssumptionSpec:
    system = load_system(settings.system) if settings.system is not None else None
    return build_assumption(settings.assumption, settings.direction, system)


def _checked_moments(path: Path) -> ProblemMoments:
    """Load *path*, refusing moments that are malformed rather than merely incompatible."""
    pm = load_moments(path)
    broken = [
        issue.message
        for issue in validate_moments(pm).issues
        if issue.code not in _INCOMPATIBLE
    ]
    if broken:
        raise CliError(f"{path}: inconsistent moments: {'; '.join(broken)}")
    return pm


def _luc_notes(pm: ProblemMoments, a: AssumptionSpec, cfg: SolverConfig) -> list[str]:
    if a.kind is not AssumptionKind.LUC or cfg.scope is not Scope.OBSERVATIONAL:
        return []
    check = luc_trivial_mean_check(pm.obs)
    if not check or check.tau is None:
        return []
    value = fmt(check.tau * pm.support.scale)
    return [f"observed means are constant in s, so luc alone gives the point {value}"]


def _run_bounds(args: argparse.Namespace, settings: RunConfig, out: TextIO) -> int:
    pm = _checked_moments(args.moments)
    a = _assumption(settings)
    cfg = settings.solver_config()
    result = solve_bounds(pm, a, cfg)
    notes = _luc_notes(pm, a, cfg)
    render_report(result, settings.format, out, command="bounds", notes=notes)
    return EXIT_OK if result.feasible else EXIT_INFEASIBLE


def _discretization(args: argparse.Namespace, settings: RunConfig) -> DiscretizationSpec | None:
    configured = settings.discretization
    order = args.order or (configured.order if configured else Direction.INCREASING)
    if args.edges is not None:
        return DiscretizationSpec.explicit(args.edges, order)
    if args.quantiles is not None:
        return DiscretizationSpec.quantile(args.quantiles, order)
    if configured is not None:
        return replace(configured.to_spec(), order=order)
    if args.order is not None:
        raise CliError("--order needs --edges, --quantiles or a configured discretization")
    return None


def _run_estimate(args: argparse.Namespace, settings: RunConfig, out: TextIO) -> int:
    data = load_samples(
        args.obs,
        args.exp,
        _discretization(args, settings),
        covariates=settings.covariates,
        y_low=settings.y_low,
        y_high=settings.y_high,
    )
    a = _assumption(settings)
    cfg = settings.solver_config()
    notes = []
    if data.lossy and (note := discretization_note(a.kind)):
        notes.append(note)

    if settings.covariates or settings.weights is not None:
        report = stratified_bounds(
            data,
            a,
            cfg,
            covariates=settings.covariates,
            weights=settings.weights,
            clip=settings.clip,
            workers=settings.workers,
        )
    else:
        report = plug_in_bounds(data.obs, data.exp, data.support, a, cfg, clip=settings.clip)
    render_report(report, settings.format, out, command="estimate", notes=notes)
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def _run_diagnose(args: argparse.Namespace, settings: RunConfig, out: TextIO) -> int:
    pm = _checked_moments(args.moments)
    a = _assumption(settings)
    report = amplification_report(pm, a, settings.solver_config())
    diagnosis = Diagnosis(
        amplification=report,
        formula=manski_formula_bounds(pm.obs),
        luc=luc_trivial_mean_check(pm.obs),
        tau=args.tau,
    )
    render_report(diagnosis, settings.format, out, command="diagnose")
    return EXIT_OK if report.restricted_combined.feasible else EXIT_INFEASIBLE


def _run_oracle(args: argparse.Namespace, settings: RunConfig, out: TextIO) -> int:
    pm = _checked_moments(args.moments)
    a = _assumption(settings)
    cfg = settings.solver_config()
    result = solve_bounds(pm, a, cfg)
    if not result.feasible:
        render_report(result, settings.format, out, command="oracle")
        return EXIT_INFEASIBLE
    oracle = grid_identified_set(scoped_moments(pm, cfg.scope), a, settings.resolution)
    report = certify(result, oracle, tol_obj=cfg.tol_obj)
    render_report(report, settings.format, out, command="oracle")
    return EXIT_OK if report.passed else EXIT_FAIL


def _run_simulate(args: argparse.Namespace, settings: RunConfig, out: TextIO) -> int:
    dgp = load_dgp(args.dgp)
    n_exp = args.n_exp or args.n
    obs, exp = draw_samples(dgp, args.n, n_exp, np.random.default_rng(args.seed))
    obs_path, exp_path = write_samples(obs, exp, args.out_dir)
    if settings.format == "json":
        payload = {
            "ok": True,
            "observational": {"path": str(obs_path), "records": len(obs)},
            "experimental": {"path": str(exp_path), "records": len(exp)},
            "tau": dgp.tau,
        }
        render_json("simulate", payload, out)
    else:
        print(f"Wrote {plural(len(obs), 'observational record')} to {obs_path}", file=out)
        print(f"Wrote {plural(len(exp), 'experimental record')} to {exp_path}", file=out)
        print(f"True effect {fmt(dgp.tau)}", file=out)
    return EXIT_OK


_COMMANDS: dict[str, Callable[[argparse.Namespace, RunConfig, TextIO], int]] = {
    "bounds": _run_bounds,
    "estimate": _run_estimate,
    "diagnose": _run_diagnose,
    "oracle": _run_oracle,
    "simulate": _run_simulate,
}


def main(argv: list[str] | None = None, out: TextIO | None = None) -> int:
    """Run the ``ltebounds`` command line.

    Args:
        argv: Arguments to parse.  Defaults to ``sys.argv[1:]``.
        out: Stream to write reports to.  Defaults to stdout.

    Returns:
        A process exit code.  Usage errors exit through
        :class:`SystemExit` with code ``3``.
    """
    args = build_parser().parse_args(argv)
    with _debug_logging(args.verbose):
        try:
            settings = _settings(args)
            return _COMMANDS[args.command](args, settings, out or sys.stdout)
        except (CliError, LteBoundsError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_ERROR
