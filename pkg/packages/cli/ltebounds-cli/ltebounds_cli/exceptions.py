"""Errors about the invocation and its input files.

A :class:`CliError` means the command could not run: a missing file, a
moments file that does not parse, a config that does not match the
schema.  Library errors from :mod:`ltebounds_core` mean the inputs
parsed but lie outside a documented domain.  The command line reports
both with exit code ``3``; an empty identified set is an answer and
gets its own code.
"""

from __future__ import annotations

from pathlib import Path


class CliError(Exception):
    """A problem with the invocation itself, not with the data it describes."""


class ParseError(CliError):
    """A file is not well-formed.

    Attributes:
        path: The offending file.
        line: 1-based line of the problem, when it can be attributed to
            one.
    """

    def __init__(self, path: Path, reason: str, line: int | None = None) -> None:
        self.path = path
        self.line = line
        where = f"{path}, line {line}" if line is not None else str(path)
        super().__init__(f"{where}: {reason}")


class SchemaError(CliError):
    """A file parses but does not have the expected fields or columns."""
