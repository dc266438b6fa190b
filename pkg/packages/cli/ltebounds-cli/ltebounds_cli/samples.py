"""Sample files and the discretization of the short-term outcome.

Both sample files are comma-separated with a header row:

* observational -- ``y, s, d`` plus any covariate columns;
* experimental -- ``s, d, z`` plus the same covariate columns.

The short-term outcome ``s`` is either already coded ``1..k`` or mapped
onto ``1..k`` by a :class:`DiscretizationSpec`.  The map is always
computed once, from both files pooled, so a value lands in the same
support point wherever it was recorded.  Instrument values are relabeled
``1..z_count`` in sorted order.
"""

from __future__ import annotations

import re
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path

import numpy as np
import pandas as pd

from ltebounds_cli.exceptions import CliError, ParseError, SchemaError
from ltebounds_core import (
    Direction,
    DomainError,
    ExperimentalSample,
    ObservationalSample,
    SupportSpec,
    get_logger,
)

_logger = get_logger(__name__)

OBSERVATIONAL_COLUMNS: tuple[str, ...] = ("y", "s", "d")
EXPERIMENTAL_COLUMNS: tuple[str, ...] = ("s", "d", "z")

# Header is line 1, so record i sits on line i + 2.
_FIRST_RECORD_LINE = 2

_PANDAS_LINE = re.compile(r"line (\d+)")


class BinningMode(StrEnum):
    EXPLICIT = "explicit"
    QUANTILE = "quantile"


@dataclass(frozen=True)
class DiscretizationSpec:
    """A map from raw short-term outcomes onto support points ``1..k``.

    Bins are ``(-inf, e1], (e1, e2], ..., (e_last, inf)``: a value equal
    to an edge goes to the lower bin.  With ``order`` decreasing the bin
    indices are reversed, so that support point ``1`` holds the largest
    values.

    Attributes:
        mode: Fixed edges, or edges at pooled quantiles.
        edges: Strictly increasing edges, explicit mode.
        q: Number of quantile bins, quantile mode.
        order: Direction of the support-point index.
    """

    mode: BinningMode
    edges: tuple[float, ...] = ()
    q: int = 0
    order: Direction = Direction.INCREASING

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", BinningMode(self.mode))
        object.__setattr__(self, "order", Direction(self.order))
        object.__setattr__(self, "edges", tuple(float(edge) for edge in self.edges))
        if self.mode is BinningMode.EXPLICIT:
            if not self.edges:
                raise DomainError("explicit discretization needs at least one edge")
            if not np.all(np.isfinite(self.edges)):
                raise DomainError("discretization edges must be finite")
            if np.any(np.diff(self.edges) <= 0.0):
                raise DomainError(f"edges must be strictly increasing, got {list(self.edges)}")
        elif self.q < 2:
            raise DomainError(f"quantile discretization needs q >= 2, got {self.q}")

    @classmethod
    def explicit(
        cls, edges: Sequence[float], order: Direction = Direction.INCREASING
    ) -> DiscretizationSpec:
        return cls(BinningMode.EXPLICIT, edges=tuple(edges), order=order)

    @classmethod
    def quantile(cls, q: int, order: Direction = Direction.INCREASING) -> DiscretizationSpec:
        return cls(BinningMode.QUANTILE, q=q, order=order)

    def bin_edges(self, pooled: pd.Series) -> np.ndarray:
        """Edges for *pooled* short-term outcomes.

        Quantile edges are observed values (lower interpolation).  Ties
        can merge quantiles, and an edge at the pooled maximum would
        leave its upper bin empty; both are dropped, so fewer than ``q``
        bins can result.
        """
        if self.mode is BinningMode.EXPLICIT:
            return np.array(self.edges)
        levels = np.arange(1, self.q) / self.q
        cuts = pooled.quantile(levels, interpolation="lower").to_numpy(dtype=float)
        edges = np.unique(cuts[cuts < pooled.max()])
        if edges.size + 1 < self.q:
            _logger.warning("ties in s leave %d of %d quantile bins", edges.size + 1, self.q)
        return edges

    def assign(self, values: np.ndarray, edges: np.ndarray) -> np.ndarray:
        """Support points ``1..k`` for *values*, ``k = len(edges) + 1``."""
        index = np.searchsorted(edges, values, side="left")
        if self.order is Direction.DECREASING:
            index = edges.size - index
        return index + 1


@dataclass(frozen=True, eq=False)
class SampleData:
    """Both samples, coded and ready for estimation.

    Attributes:
        obs: Observational records.
        exp: Experimental records, or ``None`` when no file was given.
        support: Support size, instrument count and outcome range.
        edges: Bin edges on the raw ``s`` scale; ``None`` when ``s`` was
            read as codes.
        lossy: The discretization merged distinct raw values.
        z_labels: Raw instrument value of each code ``1..z_count``.
        obs_covariates: Covariate columns of the observational records.
        exp_covariates: Covariate columns of the experimental records.
    """

    obs: ObservationalSample
    exp: ExperimentalSample | None
    support: SupportSpec
    edges: np.ndarray | None = None
    lossy: bool = False
    z_labels: tuple[float, ...] = ()
    obs_covariates: pd.DataFrame | None = None
    exp_covariates: pd.DataFrame | None = None


def _parse_line(exc: Exception) -> int | None:
    match = _PANDAS_LINE.search(str(exc))
    return int(match.group(1)) if match else None


def read_table(path: Path, columns: Sequence[str]) -> pd.DataFrame:
    """Read a sample file and check that *columns* are present and numeric.

    Raises:
        CliError: If the file does not exist.
        ParseError: If it is not well-formed CSV or a required value is
            not a number.
        SchemaError: If a required column is missing.
    """
    try:
        frame = pd.read_csv(path, skipinitialspace=True)
    except FileNotFoundError:
        raise CliError(f"no such file: {path}") from None
    except pd.errors.EmptyDataError:
        raise ParseError(path, "file is empty", 1) from None
    except pd.errors.ParserError as exc:
        reason = str(exc).strip().splitlines()[-1]
        raise ParseError(path, reason, _parse_line(exc)) from exc
    frame.columns = [str(column).strip() for column in frame.columns]

    missing = [column for column in columns if column not in frame.columns]
    if missing:
        raise SchemaError(
            f"{path}: missing column(s) {', '.join(missing)}; "
            f"found {', '.join(frame.columns) or 'none'}"
        )
    for column in columns:
        values = pd.to_numeric(frame[column], errors="coerce")
        bad = values.isna().to_numpy()
        if bad.any():
            row = int(np.argmax(bad))
            raise ParseError(
                path,
                f"column '{column}' needs a number, got {frame[column].iloc[row]!r}",
                row + _FIRST_RECORD_LINE,
            )
        frame[column] = values
    return frame


def _check_arms(frame: pd.DataFrame, path: Path) -> np.ndarray:
    arms = frame["d"].to_numpy()
    bad = (arms != 0) & (arms != 1)
    if bad.any():
        row = int(np.argmax(bad))
        raise DomainError(
            f"{path}, line {row + _FIRST_RECORD_LINE}: d must be 0 or 1, got {arms[row]:g}"
        )
    return arms.astype(int)


def _codes(pooled: pd.Series) -> int:
    values = pooled.to_numpy()
    if not np.all(np.equal(np.mod(values, 1), 0)) or values.min() < 1:
        raise DomainError("s must hold integer codes 1..k unless a discretization is given")
    return int(values.max())


def load_samples(
    obs_path: Path,
    exp_path: Path | None = None,
    disc: DiscretizationSpec | None = None,
    *,
    covariates: Sequence[str] = (),
    y_low: float | None = None,
    y_high: float | None = None,
) -> SampleData:
    """Read, discretize and code both sample files.

    Args:
        obs_path: Observational sample file.
        exp_path: Experimental sample file, if any.
        disc: Map for the short-term outcome; ``None`` reads ``s`` as
            codes ``1..k`` and infers ``k`` as the largest code.
        covariates: Extra columns both files must carry.
        y_low: Outcome range; defaults to the smallest observed ``y``.
        y_high: Outcome range; defaults to the largest observed ``y``.

    Raises:
        CliError: If a file is missing, malformed or lacks a column.
        DomainError: On ``d`` outside ``{0, 1}``, non-integer codes
            without a discretization, or an empty outcome range.
    """
    covariates = list(covariates)
    obs_frame = read_table(obs_path, OBSERVATIONAL_COLUMNS)
    if obs_frame.empty:
        raise DomainError(f"{obs_path}: no records")
    _missing_covariates(obs_frame, obs_path, covariates)
    frames = [obs_frame]
    exp_frame = None
    if exp_path is not None:
        exp_frame = read_table(exp_path, EXPERIMENTAL_COLUMNS)
        _missing_covariates(exp_frame, exp_path, covariates)
        frames.append(exp_frame)
    pooled = pd.concat([frame["s"] for frame in frames], ignore_index=True)

    if disc is None:
        k = _codes(pooled)
        edges = None
        lossy = False
        coded = [frame["s"].to_numpy().astype(int) for frame in frames]
    else:
        edges = disc.bin_edges(pooled)
        k = edges.size + 1
        coded = [disc.assign(frame["s"].to_numpy(), edges) for frame in frames]
        lossy = pooled.nunique() > np.unique(np.concatenate(coded)).size
        empty = sorted(set(range(1, k + 1)) - set(np.concatenate(coded).tolist()))
        if empty:
            _logger.warning("support points %s hold no records", empty)
        _logger.debug("discretized s into k = %d bins at edges %s", k, edges)

    y = obs_frame["y"].to_numpy(dtype=float)
    support_low = float(y.min()) if y_low is None else y_low
    support_high = float(y.max()) if y_high is None else y_high

    obs = ObservationalSample(y, coded[0], _check_arms(obs_frame, obs_path))
    exp = None
    labels: tuple[float, ...] = ()
    if exp_frame is not None and exp_path is not None:
        raw_z = exp_frame["z"].to_numpy(dtype=float)
        values = np.unique(raw_z)
        labels = tuple(float(value) for value in values)
        exp = ExperimentalSample(
            coded[1], _check_arms(exp_frame, exp_path), np.searchsorted(values, raw_z) + 1
        )
    support = SupportSpec(k=k, z_count=max(len(labels), 1), y_low=support_low, y_high=support_high)
    _logger.info(
        "read %d observational and %d experimental records, k = %d",
        len(obs),
        0 if exp is None else len(exp),
        k,
    )
    return SampleData(
        obs=obs,
        exp=exp,
        support=support,
        edges=edges,
        lossy=lossy,
        z_labels=labels,
        obs_covariates=obs_frame[covariates],
        exp_covariates=None if exp_frame is None else exp_frame[covariates],
    )


def _missing_covariates(frame: pd.DataFrame, path: Path, covariates: list[str]) -> None:
    missing = [name for name in covariates if name not in frame.columns]
    if missing:
        raise SchemaError(f"{path}: missing covariate column(s) {', '.join(missing)}")
