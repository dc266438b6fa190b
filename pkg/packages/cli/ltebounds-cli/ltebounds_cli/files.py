"""Reading and writing the command line's files.

Every write is a whole-file replacement: the text goes to a temporary
file in the target directory, which then replaces the target with
:func:`os.replace`.  A reader never sees half a file.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Any, TypeVar

import pandas as pd
import yaml
from pydantic import BaseModel, ValidationError

from ltebounds_cli.config import (
    CustomSystemDocument,
    DgpDocument,
    MomentsDocument,
    RunConfig,
)
from ltebounds_cli.exceptions import CliError, ParseError, SchemaError
from ltebounds_core import (
    DgpSpec,
    ExperimentalSample,
    LinearSystem,
    ObservationalSample,
    ProblemMoments,
    get_logger,
)

_logger = get_logger(__name__)

OBSERVATIONAL_FILE = "observational.csv"
EXPERIMENTAL_FILE = "experimental.csv"

_Model = TypeVar("_Model", bound=BaseModel)


def _yaml_detail(exc: yaml.YAMLError) -> tuple[str, int | None]:
    """Reduce a YAML error to a one-line reason and a 1-based line."""
    problem = getattr(exc, "problem", None)
    mark = getattr(exc, "problem_mark", None)
    reason = problem or str(exc).splitlines()[0]
    line = mark.line + 1 if mark is not None else None
    return reason, line


def read_yaml(path: Path) -> Any:
    """Parse a YAML file.

    Raises:
        CliError: If the file cannot be read.
        ParseError: If it is not valid YAML.
    """
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise CliError(f"no such file: {path}") from None
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        reason, line = _yaml_detail(exc)
        raise ParseError(path, reason, line) from exc


def describe_validation(exc: ValidationError) -> str:
    """One line per schema violation, joined with ``; ``."""
    parts = []
    for error in exc.errors():
        where = ".".join(str(part) for part in error["loc"]) or "document"
        parts.append(f"{where}: {error['msg']}")
    return "; ".join(parts)


def load_document(path: Path, model: type[_Model]) -> _Model:
    """Parse *path* and validate it against *model*.

    Raises:
        CliError: If the file cannot be read.
        ParseError: If it is not valid YAML.
        SchemaError: If it does not match *model*.
    """
    data = read_yaml(path)
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: expected a mapping, got {type(data).__name__}")
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        raise SchemaError(f"{path}: {describe_validation(exc)}") from exc


def load_moments(path: Path) -> ProblemMoments:
    return load_document(path, MomentsDocument).to_moments()


def load_dgp(path: Path) -> DgpSpec:
    return load_document(path, DgpDocument).to_dgp()


def load_system(path: Path) -> LinearSystem:
    return load_document(path, CustomSystemDocument).to_system()


def load_run_config(path: Path) -> RunConfig:
    """Read a run config; a relative ``system`` path is resolved against *path*'s folder."""
    config = load_document(path, RunConfig)
    if config.system is not None and not config.system.is_absolute():
        config = config.model_copy(update={"system": path.parent / config.system})
    return config


def atomic_write_text(path: Path, text: str) -> None:
    """Replace *path* with *text* in one step.

    Raises:
        CliError: If the directory cannot be created or written.
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}") from exc
    temp = Path(name)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(temp, path)
    except BaseException:
        temp.unlink(missing_ok=True)
        raise
    _logger.debug("wrote %s", path)


def dump_moments(pm: ProblemMoments, path: Path) -> None:
    """Write *pm* as a moments file."""
    document = MomentsDocument.from_moments(pm)
    text = yaml.safe_dump(document.model_dump(mode="json"), sort_keys=False)
    atomic_write_text(path, text)


def write_samples(
    obs: ObservationalSample, exp: ExperimentalSample, out_dir: Path
) -> tuple[Path, Path]:
    """Write both samples as CSV files into *out_dir*.

    Returns:
        The observational and experimental file paths.
    """
    obs_path = out_dir / OBSERVATIONAL_FILE
    exp_path = out_dir / EXPERIMENTAL_FILE
    observational = pd.DataFrame({"y": obs.y, "s": obs.s, "d": obs.d})
    experimental = pd.DataFrame({"s": exp.s, "d": exp.d, "z": exp.z})
    atomic_write_text(obs_path, observational.to_csv(index=False))
    atomic_write_text(exp_path, experimental.to_csv(index=False))
    return obs_path, exp_path
