"""Command line tools for bounding long-term treatment effects.

The console script is ``ltebounds``.  Every command is also reachable
in-process through :func:`~ltebounds_cli.cli.main`, which takes an
argument list and returns an exit code rather than calling
:func:`sys.exit`.
"""

from ltebounds_cli.cli import main
from ltebounds_cli.exceptions import CliError, ParseError, SchemaError
from ltebounds_cli.files import dump_moments, load_moments, load_run_config
from ltebounds_cli.samples import DiscretizationSpec, SampleData, load_samples
from ltebounds_cli.strata import StratifiedResult, stratified_bounds

__all__ = [
    "CliError",
    "DiscretizationSpec",
    "ParseError",
    "SampleData",
    "SchemaError",
    "StratifiedResult",
    "dump_moments",
    "load_moments",
    "load_run_config",
    "load_samples",
    "main",
    "stratified_bounds",
]
