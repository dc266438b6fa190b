"""Rendering: text for a person at a terminal, JSON for a program.

Intervals are always reported on the original outcome scale.  The JSON
shape is a published contract: ``SCHEMA_VERSION`` changes only for a
breaking change, and new fields are added rather than existing ones
repurposed.
"""

from __future__ import annotations

import json
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, TextIO

import numpy as np

from ltebounds_cli.strata import StratifiedResult
from ltebounds_core import (
    AmplificationReport,
    AssumptionKind,
    BoundsResult,
    CertificationReport,
    FormulaBounds,
    Interval,
    LucCheck,
    Status,
    Witness,
    misspecification_distance,
)

SCHEMA_VERSION = "lte-bounds/1"

LOCAL_SEARCH_CAVEAT = "bounds are local-search certified only"
INFEASIBLE_CAVEAT = "no short-term law and link function pair is compatible with the data"
DISCRETIZATION_NOTE = (
    "s was discretized; {assumption} restricts the discretized outcome, "
    "which does not follow from the same restriction on the raw one"
)

# Discretization-sensitive assumptions.
_NOT_ORDER_ONLY = frozenset({AssumptionKind.LUC, AssumptionKind.TI, AssumptionKind.LIV_AND_TI})

_AGREE_TOL = 1e-9


def fmt(value: float) -> str:
    """Six significant digits, with no ``-0``."""
    text = f"{value:.6g}"
    return "0" if text == "-0" else text


def plural(n: int, noun: str) -> str:
    """Return *n* and *noun*, pluralised by adding an ``s``."""
    return f"{n} {noun}" if n == 1 else f"{n} {noun}s"


def format_interval(interval: Interval) -> str:
    return "empty" if interval.empty else f"[{fmt(interval.lo)}, {fmt(interval.hi)}]"


def _vector(values: np.ndarray) -> str:
    return "(" + ", ".join(fmt(float(v)) for v in values) + ")"


def discretization_note(kind: AssumptionKind) -> str | None:
    """The interpretation note for a lossy discretization under *kind*, if any."""
    if kind in _NOT_ORDER_ONLY:
        return DISCRETIZATION_NOTE.format(assumption=kind)
    return None


def caveats(result: BoundsResult, *, certified: bool = False) -> list[str]:
    """Caveats implied by how *result* was obtained.

    An exact result has none.  A local-search result has one unless an
    oracle comparison passed.
    """
    if result.status is Status.INFEASIBLE:
        return [INFEASIBLE_CAVEAT]
    found: list[str] = []
    if result.status is Status.RELAXED:
        found.append(
            "the empirical constraint set is empty; bounds are for the set "
            f"relaxed by slack {result.relaxation:.6f}"
        )
    searched = result.status is Status.LOCAL_SEARCH or (
        result.status is Status.RELAXED and result.assumption.kind is not AssumptionKind.LUC
    )
    if searched and not certified:
        found.append(LOCAL_SEARCH_CAVEAT)
    return found


def _interval_payload(interval: Interval) -> dict[str, float] | None:
    return None if interval.empty else {"lo": interval.lo, "hi": interval.hi}


def _witness_payload(witness: Witness | None, scale: tuple[float, float]) -> dict[str, Any] | None:
    if witness is None:
        return None
    low, high = scale
    return {
        "effect": witness.value * (high - low),
        "gamma": witness.law.gamma.tolist(),
        "link": (low + witness.link.m * (high - low)).tolist(),
    }


def _number(value: float) -> float | None:
    return None if math.isnan(value) else value


def bounds_payload(
    result: BoundsResult, *, notes: Sequence[str] = (), certified: bool = False
) -> dict[str, Any]:
    """The JSON object describing one :class:`~ltebounds_core.BoundsResult`."""
    return {
        "ok": result.feasible,
        "assumption": result.assumption.label,
        "scope": str(result.scope),
        "status": str(result.status),
        "interval": _interval_payload(result.interval),
        "scale": {"yLow": result.scale[0], "yHigh": result.scale[1]},
        "relaxation": result.relaxation,
        "witnesses": {
            "lower": _witness_payload(result.lower_witness, result.scale),
            "upper": _witness_payload(result.upper_witness, result.scale),
        },
        "caveats": [*caveats(result, certified=certified), *notes],
    }


def _render_witness(name: str, witness: Witness | None, result: BoundsResult, out: TextIO) -> None:
    if witness is None:
        return
    low, high = result.scale
    gamma, m = witness.law.gamma, low + witness.link.m * (high - low)
    print(
        f"  {name:<8} {fmt(witness.value * (high - low))} at "
        f"gamma(0) = {_vector(gamma[0])}, gamma(1) = {_vector(gamma[1])}",
        file=out,
    )
    print(f"  {'':<8} m(0) = {_vector(m[0])}, m(1) = {_vector(m[1])}", file=out)


def render_bounds_text(
    result: BoundsResult,
    out: TextIO,
    *,
    notes: Sequence[str] = (),
    certified: bool = False,
) -> None:
    """Write one result: interval, status, witnesses, then caveats."""
    print(f"{result.assumption.label}, {result.scope} scope", file=out)
    print(f"  {'bounds':<8} {format_interval(result.interval)}", file=out)
    print(f"  {'status':<8} {result.status}", file=out)
    _render_witness("lower", result.lower_witness, result, out)
    _render_witness("upper", result.upper_witness, result, out)
    for line in [*caveats(result, certified=certified), *notes]:
        print(f"  note: {line}", file=out)


def stratified_payload(result: StratifiedResult, *, notes: Sequence[str] = ()) -> dict[str, Any]:
    found = sorted({c for cell in result.cells for c in caveats(cell.result)})
    return {
        "ok": result.feasible,
        "assumption": result.assumption.label,
        "status": str(result.status),
        "interval": _interval_payload(result.interval),
        "covariates": list(result.covariates),
        "relaxation": result.relaxation,
        "cells": [
            {
                "label": cell.label,
                "weight": cell.weight,
                "nObs": cell.n_obs,
                "nExp": cell.n_exp,
                **bounds_payload(cell.result),
            }
            for cell in result.cells
        ],
        "caveats": [*found, *notes],
    }


def render_stratified_text(
    result: StratifiedResult, out: TextIO, *, notes: Sequence[str] = ()
) -> None:
    """Write the combined interval, then one row per cell."""
    if len(result.cells) == 1 and not result.covariates:
        render_bounds_text(result.cells[0].result, out, notes=notes)
        return
    print(f"{result.assumption.label}, {len(result.cells)} cells", file=out)
    print(f"  {'bounds':<8} {format_interval(result.interval)}", file=out)
    print(f"  {'status':<8} {result.status}", file=out)
    width = max(len(cell.label) for cell in result.cells)
    for cell in result.cells:
        print(
            f"  {cell.label:<{width}}  weight {cell.weight:.4f}  "
            f"n = {cell.n_obs}/{cell.n_exp}  {format_interval(cell.result.interval)}  "
            f"{cell.result.status}",
            file=out,
        )
    found = sorted({c for cell in result.cells for c in caveats(cell.result)})
    for line in [*found, *notes]:
        print(f"  note: {line}", file=out)


@dataclass(frozen=True)
class Diagnosis:
    """Everything ``diagnose`` reports.

    Attributes:
        amplification: Worst-case and restricted bounds in both scopes.
        formula: Closed-form worst-case bounds.
        luc: Whether latent unconfoundedness alone pins the effect down.
        tau: A hypothesized true effect, original scale, or ``None``.
    """

    amplification: AmplificationReport
    formula: FormulaBounds
    luc: LucCheck
    tau: float | None = None

    @property
    def scale(self) -> float:
        low, high = self.amplification.worst_observational.scale
        return high - low

    @property
    def rows(self) -> list[tuple[str, BoundsResult]]:
        report = self.amplification
        rows = [
            (f"worst-case/{report.worst_observational.scope}", report.worst_observational),
            (f"worst-case/{report.worst_combined.scope}", report.worst_combined),
        ]
        if report.assumption.kind is not AssumptionKind.WORST_CASE:
            for result in (report.restricted_observational, report.restricted_combined):
                rows.append((f"{report.assumption.label}/{result.scope}", result))
        return rows

    @property
    def formula_matches(self) -> bool:
        """Whether the closed form agrees with every feasible worst-case solve."""
        derived = self.formula.derived
        report = self.amplification
        return all(
            max(abs(solved.lo - derived.lo), abs(solved.hi - derived.hi)) <= _AGREE_TOL
            for solved in (
                result.normalized
                for result in (report.worst_observational, report.worst_combined)
                if result.feasible
            )
        )

    def findings(self) -> list[str]:
        """One sentence per conclusion, in a fixed order."""
        report = self.amplification
        found = []
        if report.experiment_uninformative:
            found.append(
                "combined = observational-only under worst-case: "
                "the experiment adds nothing without assumptions"
            )
        else:
            found.append("the experiment narrows the worst-case bounds")
        if report.assumption.kind is not AssumptionKind.WORST_CASE:
            if report.amplified:
                found.append(
                    f"the experiment narrows the {report.assumption.label} bounds "
                    f"(combined/observational width ratio {fmt(report.width_ratio)})"
                )
            else:
                found.append(f"the experiment does not narrow the {report.assumption.label} bounds")
        found.append("nesting holds" if report.nesting_ok else "nesting is violated")
        derived = format_interval(self.formula.derived.scaled(self.scale))
        if self.formula_matches:
            found.append(f"worst-case formula {derived} matches the solver")
        else:
            found.append(f"worst-case formula {derived} differs from the solver")
        if not self.formula.conventions_agree:
            printed = format_interval(self.formula.printed.scaled(self.scale))
            found.append(f"with the arm shares swapped the formula gives {printed}")
        if self.luc:
            found.append(
                "luc point-identifies the effect without experimental data: "
                f"{fmt(self.luc.tau * self.scale)}"
            )
        return found

    def distances(self) -> dict[str, float | None]:
        if self.tau is None:
            return {}
        return {
            name: misspecification_distance(result.interval, self.tau) if result.feasible else None
            for name, result in self.rows
        }


def diagnosis_payload(diagnosis: Diagnosis) -> dict[str, Any]:
    report = diagnosis.amplification
    return {
        "ok": report.nesting_ok,
        "assumption": report.assumption.label,
        "bounds": {
            name: {"interval": _interval_payload(result.interval), "status": str(result.status)}
            for name, result in diagnosis.rows
        },
        "experimentUninformative": report.experiment_uninformative,
        "amplified": report.amplified,
        "nestingOk": report.nesting_ok,
        "widthRatio": _number(report.width_ratio),
        "formula": {
            "derived": _interval_payload(diagnosis.formula.derived.scaled(diagnosis.scale)),
            "printed": _interval_payload(diagnosis.formula.printed.scaled(diagnosis.scale)),
            "matchesSolver": diagnosis.formula_matches,
        },
        "lucPointIdentified": (
            None if not diagnosis.luc else diagnosis.luc.tau * diagnosis.scale
        ),
        "tau": diagnosis.tau,
        "misspecification": diagnosis.distances(),
        "findings": diagnosis.findings(),
    }


def render_diagnosis_text(diagnosis: Diagnosis, out: TextIO) -> None:
    rows = diagnosis.rows
    distances = diagnosis.distances()
    width = max(len(name) for name, _ in rows)
    for name, result in rows:
        line = f"{name:<{width}}  {format_interval(result.interval):<22} {result.status}"
        if name in distances:
            distance = distances[name]
            line += f"  distance to tau {'n/a' if distance is None else fmt(distance)}"
        print(line.rstrip(), file=out)
    print(file=out)
    for finding in diagnosis.findings():
        print(finding, file=out)


def certification_payload(report: CertificationReport) -> dict[str, Any]:
    oracle = report.oracle
    return {
        "ok": report.passed,
        "passed": report.passed,
        "solver": bounds_payload(report.result, certified=report.passed),
        "oracle": {
            "interval": _interval_payload(oracle.interval),
            "resolution": oracle.resolution,
            "latticePoints": oracle.lattice_points,
            "maxGap": oracle.max_gap,
        },
        "lowerGap": _number(report.lower_gap),
        "upperGap": _number(report.upper_gap),
        "threshold": report.threshold,
    }


def render_certification_text(report: CertificationReport, out: TextIO) -> None:
    result, oracle = report.result, report.oracle
    print(f"{result.assumption.label}, {result.scope} scope", file=out)
    print(f"  {'solver':<8} {format_interval(result.interval)}  {result.status}", file=out)
    print(
        f"  {'oracle':<8} {format_interval(oracle.interval)}  "
        f"resolution {oracle.resolution}, {oracle.lattice_points} lattice points",
        file=out,
    )
    if result.feasible:
        print(
            f"  {'gaps':<8} lower {report.lower_gap:+.3g}, upper {report.upper_gap:+.3g} "
            f"(threshold {report.threshold:.3g}, normalized scale)",
            file=out,
        )
    else:
        print(f"  note: {INFEASIBLE_CAVEAT}", file=out)
    print("PASS" if report.passed else "FAIL", file=out)


def render_json(command: str, payload: dict[str, Any], out: TextIO) -> None:
    """Write *payload* under the versioned envelope."""
    json.dump({"schemaVersion": SCHEMA_VERSION, "command": command, **payload}, out, indent=2)
    print(file=out)


def render_report(
    report: BoundsResult | StratifiedResult | CertificationReport | Diagnosis,
    output_format: str,
    out: TextIO,
    *,
    command: str,
    notes: Sequence[str] = (),
) -> None:
    """Write *report* as ``text`` or ``json``."""
    if isinstance(report, BoundsResult):
        if output_format == "json":
            render_json(command, bounds_payload(report, notes=notes), out)
        else:
            render_bounds_text(report, out, notes=notes)
    elif isinstance(report, StratifiedResult):
        if output_format == "json":
            render_json(command, stratified_payload(report, notes=notes), out)
        else:
            render_stratified_text(report, out, notes=notes)
    elif isinstance(report, CertificationReport):
        if output_format == "json":
            render_json(command, certification_payload(report), out)
        else:
            render_certification_text(report, out)
    elif output_format == "json":
        render_json(command, diagnosis_payload(report), out)
    else:
        render_diagnosis_text(report, out)
