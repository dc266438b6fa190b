#!/usr/bin/env python3
"""Development task runner for the ltebounds workspace.

Usage:
    python scripts/dev.py lint        # ruff check
    python scripts/dev.py format      # ruff format, then ruff check --fix
    python scripts/dev.py check       # format check + lint + declared dependencies
    python scripts/dev.py test        # every test, slow ones included
    python scripts/dev.py test:fast   # skip Monte Carlo and oracle runs marked slow
    python scripts/dev.py test:cov    # tests, then the coverage floors
    python scripts/dev.py audit       # pip-audit over the active environment
    python scripts/dev.py clean       # remove caches and build output
"""

from __future__ import annotations

import shutil
import subprocess
import sys
from collections.abc import Callable
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
SOURCES = ["packages/", "scripts/"]

#: Minimum line coverage per import package.  The aggregate floor is
#: ``[tool.coverage.report] fail_under`` in the root pyproject.toml.
#: Raise a floor when its package moves up; never lower one silently.
COVERAGE_FLOORS: dict[str, int] = {
    "ltebounds_core": 95,
    "ltebounds_cli": 92,
    "ltebounds_testing": 95,
}

_CACHES = (
    "__pycache__",
    ".pytest_cache",
    ".ruff_cache",
    "*.egg-info",
    "dist",
    "htmlcov",
)

# Tools resolve from the active virtualenv.
_PY = sys.executable


def _run(*args: str, check: bool = True) -> int:
    print(f"\n$ {' '.join(args)}", flush=True)
    code = subprocess.run([_PY, "-m", *args], cwd=ROOT, check=False).returncode
    if check and code != 0:
        sys.exit(code)
    return code


def lint() -> None:
    """Run ruff without fixing anything."""
    _run("ruff", "check", *SOURCES)


def fmt() -> None:
    """Format, then apply safe lint fixes."""
    _run("ruff", "format", *SOURCES)
    _run("ruff", "check", "--fix", *SOURCES)


def check() -> None:
    """Everything CI checks, without modifying files."""
    _run("ruff", "format", "--check", *SOURCES)
    lint()
    code = subprocess.run(
        [_PY, "scripts/check_declared_dependencies.py"], cwd=ROOT, check=False
    ).returncode
    if code != 0:
        sys.exit(code)


def test() -> None:
    """Run every test."""
    _run("pytest", "packages/", "-v")


def test_fast() -> None:
    """Run the tests not marked slow."""
    _run("pytest", "packages/", "-m", "not slow")


def test_cov() -> None:
    """Run the tests under coverage and enforce each package's floor."""
    # Coverage starts before pytest so that ltebounds-testing, a pytest11
    # plugin imported at startup, is measured too.
    _run("coverage", "run", "-m", "pytest", "packages/", "-q")
    _run("coverage", "xml")

    below = [
        package
        for package, floor in COVERAGE_FLOORS.items()
        if _run(
            "coverage",
            "report",
            f"--include=*/{package}/*",
            f"--fail-under={floor}",
            check=False,
        )
    ]
    aggregate = _run("coverage", "report", check=False)
    if below:
        print(f"\nBelow the per-package floor: {', '.join(below)}")
    if below or aggregate:
        sys.exit(1)


def audit() -> None:
    """Check installed dependencies against known vulnerabilities."""
    _run("pip_audit")


def clean() -> None:
    """Remove caches and build output outside the workspace virtualenv."""
    venv = ROOT / ".venv"
    removed = 0
    for pattern in _CACHES:
        for path in ROOT.rglob(pattern):
            if venv in (path, *path.parents) or not path.exists():
                continue
            if path.is_dir():
                shutil.rmtree(path)
            else:
                path.unlink()
            removed += 1
    for path in (ROOT / ".coverage", ROOT / "coverage.xml"):
        if path.exists():
            path.unlink()
            removed += 1
    print(f"Removed {removed} item(s).")


TASKS: dict[str, Callable[[], None]] = {
    "lint": lint,
    "format": fmt,
    "check": check,
    "test": test,
    "test:fast": test_fast,
    "test:cov": test_cov,
    "audit": audit,
    "clean": clean,
}


def main() -> None:
    if len(sys.argv) < 2 or sys.argv[1] in ("-h", "--help", "help"):
        print(__doc__)
        sys.exit(0)
    task = TASKS.get(sys.argv[1])
    if task is None:
        print(f"Unknown task: {sys.argv[1]}. Available: {', '.join(TASKS)}")
        sys.exit(1)
    task()


if __name__ == "__main__":
    main()
