"""Tests for the shared logging namespace."""

import logging

import pytest

from ltebounds_core import LOGGER_NAMESPACE, AssumptionSpec, get_logger, solve_bounds


class TestGetLogger:
    def test_namespace_root(self):
        assert LOGGER_NAMESPACE == "ltebounds"

    @pytest.mark.parametrize(
        ("module", "expected"),
        [
            ("ltebounds_core.solver", "ltebounds.core.solver"),
            ("ltebounds_core.oracle", "ltebounds.core.oracle"),
            ("ltebounds_cli.cli", "ltebounds.cli.cli"),
            ("ltebounds_testing.instances", "ltebounds.testing.instances"),
        ],
    )
    def test_rewrites_distribution_prefix(self, module, expected):
        assert get_logger(module).name == expected

    def test_every_logger_descends_from_the_namespace_root(self):
        root = logging.getLogger(LOGGER_NAMESPACE)
        child = get_logger("ltebounds_core.estimation")
        assert child.name.startswith(f"{root.name}.")

    def test_null_handler_attached_to_root(self):
        root = logging.getLogger(LOGGER_NAMESPACE)
        assert any(isinstance(h, logging.NullHandler) for h in root.handlers)

    def test_library_attaches_no_output_handler(self):
        root = logging.getLogger(LOGGER_NAMESPACE)
        assert all(isinstance(h, logging.NullHandler) for h in root.handlers)


class TestLogRecords:
    def test_solve_logs_the_interval_at_info(self, two_point_moments, caplog):
        with caplog.at_level(logging.INFO, logger=LOGGER_NAMESPACE):
            solve_bounds(two_point_moments, AssumptionSpec.luc())
        records = [r for r in caplog.records if r.name == "ltebounds.core.solver"]
        assert any("bounds under luc" in r.getMessage() for r in records)
