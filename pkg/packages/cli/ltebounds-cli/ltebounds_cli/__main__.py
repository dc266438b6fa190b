"""Entry point for ``python -m ltebounds_cli`` and the ``ltebounds`` script."""

from __future__ import annotations

import sys

from ltebounds_cli.cli import main

if __name__ == "__main__":
    sys.exit(main())
