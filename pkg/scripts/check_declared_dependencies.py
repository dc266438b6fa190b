"""Check that every package declares the third-party modules it imports.

    python scripts/check_declared_dependencies.py

Every package is installed into one shared virtualenv, so an undeclared
import works here and fails only for someone who installed a single
package from PyPI.  ``ltebounds-cli`` imports ``numpy`` directly while
``ltebounds-core`` would pull it in anyway; that is the kind of gap this
catches.

Module-level imports count, including those under ``if TYPE_CHECKING``.
Imports inside functions and classes do not.
"""

from __future__ import annotations

import ast
import re
import sys
import tomllib
from importlib.metadata import packages_distributions
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

PACKAGES = [
    "packages/core/ltebounds-core",
    "packages/cli/ltebounds-cli",
    "packages/testing/ltebounds-testing",
]


def _normalise(name: str) -> str:
    """PEP 503 form, so ``PyYAML`` and ``pyyaml`` compare equal."""
    return re.sub(r"[-_.]+", "-", name).lower()


def _top_level_imports(body: list[ast.stmt]) -> set[str]:
    modules: set[str] = set()
    for node in body:
        if isinstance(node, ast.Import):
            modules |= {alias.name.partition(".")[0] for alias in node.names}
        elif isinstance(node, ast.ImportFrom) and node.level == 0 and node.module:
            modules.add(node.module.partition(".")[0])
        elif isinstance(node, ast.If | ast.Try):
            modules |= _top_level_imports(node.body)
            modules |= _top_level_imports(node.orelse)
    return modules


def _imports(package: Path) -> set[str]:
    source = package / package.name.replace("-", "_")
    modules: set[str] = set()
    for path in sorted(source.rglob("*.py")):
        tree = ast.parse(path.read_text(encoding="utf-8"), filename=str(path))
        modules |= _top_level_imports(tree.body)
    return modules - set(sys.stdlib_module_names) - {source.name}


def _declared(package: Path) -> set[str]:
    manifest = tomllib.loads((package / "pyproject.toml").read_text(encoding="utf-8"))
    return {
        _normalise(name)
        for name in manifest["tool"]["poetry"]["dependencies"]
        if name != "python"
    }


def _undeclared(package: Path, index: dict[str, list[str]]) -> list[str]:
    declared = _declared(package)
    missing = []
    for module in sorted(_imports(package)):
        # A module that is not installed at all is named after itself.
        shipped_by = {_normalise(name) for name in index.get(module, [module])}
        if not shipped_by & declared:
            missing.append(f"{package.name} imports {module} ({', '.join(sorted(shipped_by))})")
    print(f"  {package.name:<24} {len(declared)} declared, {len(missing)} missing")
    return missing


def main() -> int:
    index = packages_distributions()
    errors = [error for package in PACKAGES for error in _undeclared(ROOT / package, index)]
    if errors:
        print("\nundeclared in pyproject.toml:", file=sys.stderr)
        for error in errors:
            print(f"  - {error}", file=sys.stderr)
        return 1
    print(f"\nOK: all {len(PACKAGES)} packages declare what they import")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
