"""Exception hierarchy for ltebounds.

All exceptions raised by :mod:`ltebounds_core` inherit from
:class:`LteBoundsError`, so callers can catch the whole family with a
single ``except`` clause.

Most of them also inherit from a builtin, so that they read as the
ordinary Python failure they are:

* :class:`DomainError` -- an argument lies outside its documented
  domain.  A :class:`ValueError`.
* :class:`FiberEmptyError` -- a selector was requested at a short-term
  law whose fiber of link functions is empty.  A :class:`LookupError`.
* :class:`ResolutionError` -- the oracle lattice cannot represent any
  feasible short-term law.  A :class:`ValueError`.
* :class:`EmptySetError` -- a distance was requested to an empty
  interval.  A :class:`ValueError`.

:class:`InfeasibleError` is the odd one out.  An empty identified set
is an *answer*, not a malformed question, so :func:`solve_bounds
<ltebounds_core.solve_bounds>` normally reports it through
``Status.INFEASIBLE``.  The exception only exists for callers that ask
for strict mode.

Data problems that are not programming errors -- masses that do not sum
to one, means outside the unit interval -- are never raised at all.
:func:`~ltebounds_core.validate_moments` returns them as a report.
"""


class LteBoundsError(Exception):
    """Base exception for all ltebounds library errors."""


class DomainError(LteBoundsError, ValueError):
    """An argument lies outside its documented domain.

    Raised, for example, when a short-term law puts less mass on a cell
    than the observational data already do (the latent propensity would
    exceed one), when array shapes disagree with the support, or when a
    sample outcome falls outside ``[y_low, y_high]`` and clipping is off.

    Example::

        try:
            latent_propensity(pm, law, d=1, s=0)
        except DomainError as exc:
            print(f"law is not compatible with the data: {exc}")
    """


class FiberEmptyError(LteBoundsError, LookupError):
    """No link function is compatible with the data at this short-term law.

    Selectors are only defined on a nonempty fiber.  Check
    :attr:`FiberDescription.feasible
    <ltebounds_core.FiberDescription.feasible>` first, or catch this.
    """


class ResolutionError(LteBoundsError, ValueError):
    """The oracle lattice admits no feasible short-term law.

    Lattice points are rounded *up* onto the lower-bound constraints, so
    a coarse lattice can overshoot the unit budget.  Raise the
    resolution and try again.  Also raised when the support is too large
    or the resolution too small for brute-force enumeration.
    """


class EmptySetError(LteBoundsError, ValueError):
    """An operation needs a nonempty interval and got an empty one."""


class InfeasibleError(LteBoundsError):
    """The identified set is empty.

    Only raised by ``solve_bounds(..., raise_on_infeasible=True)``.
    The default reports ``Status.INFEASIBLE`` instead.
    """
