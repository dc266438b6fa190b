"""Tests for the exception hierarchy."""

import pytest

from ltebounds_core import (
    DomainError,
    EmptySetError,
    FiberEmptyError,
    InfeasibleError,
    LteBoundsError,
    ResolutionError,
)


class TestExceptionHierarchy:
    @pytest.mark.parametrize(
        "error",
        [DomainError, EmptySetError, FiberEmptyError, InfeasibleError, ResolutionError],
        ids=lambda e: e.__name__,
    )
    def test_every_error_is_lte_bounds_error(self, error):
        assert issubclass(error, LteBoundsError)

    @pytest.mark.parametrize(
        ("error", "builtin"),
        [
            (DomainError, ValueError),
            (ResolutionError, ValueError),
            (EmptySetError, ValueError),
            (FiberEmptyError, LookupError),
        ],
        ids=["domain", "resolution", "empty-set", "fiber-empty"],
    )
    def test_builtin_mixins(self, error, builtin):
        assert issubclass(error, builtin)

    def test_infeasible_is_not_a_value_error(self):
        """An empty identified set is an answer, not a malformed argument."""
        assert not issubclass(InfeasibleError, ValueError)

    def test_fiber_empty_is_not_a_value_error(self):
        assert not issubclass(FiberEmptyError, ValueError)

    def test_message_is_kept(self):
        assert str(DomainError("k must be at least 1")) == "k must be at least 1"

    def test_catch_lte_bounds_error_catches_domain_error(self):
        with pytest.raises(LteBoundsError):
            raise DomainError("bad")
