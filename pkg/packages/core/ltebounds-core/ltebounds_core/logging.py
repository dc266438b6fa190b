"""Logging helpers shared by every ``ltebounds`` package.

The library logs under a single ``ltebounds.*`` namespace so that a host
application can raise or silence all of it with one call::

    logging.getLogger("ltebounds").setLevel(logging.DEBUG)

A :class:`~logging.NullHandler` is attached to the namespace root and no
other handler is ever installed: output is entirely the host's decision.

Levels used across the packages:

* ``DEBUG`` -- per-start search progress, alternation steps, lattice
  sizes.  Per-solve volume.
* ``INFO`` -- dispatch decisions and final intervals.  Once per solve.
* ``WARNING`` -- degraded but recovered behaviour: a dropped empty
  instrument cell, clipped outcomes, an empty constraint set that had
  to be relaxed.

Failures that raise are not logged.  An exception that is both logged
and raised gets reported twice.
"""

from __future__ import annotations

import logging

#: Root of the library logger namespace.
LOGGER_NAMESPACE: str = "ltebounds"

logging.getLogger(LOGGER_NAMESPACE).addHandler(logging.NullHandler())


def get_logger(module: str) -> logging.Logger:
    """Return the ``ltebounds.*`` logger for a module.

    Pass ``__name__``.  The distribution prefix is rewritten so that
    ``ltebounds_core.solver`` logs as ``ltebounds.core.solver``.

    Args:
        module: The calling module's ``__name__``.

    Returns:
        A configured :class:`~logging.Logger`.
    """
    suffix = module.removeprefix("ltebounds_")
    return logging.getLogger(f"{LOGGER_NAMESPACE}.{suffix}")
