"""End-to-end tests for the ``ltebounds`` command."""

from __future__ import annotations

import json
import logging
import runpy
import sys

import pandas as pd
import pytest

from ltebounds_cli import cli
from ltebounds_cli.cli import EXIT_ERROR, EXIT_FAIL, EXIT_INFEASIBLE, EXIT_OK, main
from ltebounds_core import LOGGER_NAMESPACE, CertificationReport
from ltebounds_testing import TWO_POINT_BOUNDS, TWO_POINT_TAU


class TestBounds:
    def test_luc_point_identifies_the_worked_example(self, moments_file, capsys):
        code = main(["bounds", "--moments", str(moments_file), "--assumption", "luc"])

        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("luc, combined scope")
        assert "[0.35, 0.35]" in out
        assert "note:" not in out

    def test_observational_scope(self, moments_file, capsys):
        main(
            [
                "bounds",
                "--moments",
                str(moments_file),
                "--assumption",
                "luc",
                "--scope",
                "observational",
            ]
        )

        assert "[0.15, 0.4]" in capsys.readouterr().out

    def test_worst_case_is_the_default(self, moments_file, capsys):
        main(["bounds", "--moments", str(moments_file)])

        assert "worst-case, combined scope" in capsys.readouterr().out

    def test_json_format(self, moments_file, capsys):
        main(["bounds", "--moments", str(moments_file), "--assumption", "luc", "--format", "json"])

        payload = json.loads(capsys.readouterr().out)
        assert payload["schemaVersion"] == "lte-bounds/1"
        assert payload["command"] == "bounds"
        assert payload["ok"] is True
        lo, hi = TWO_POINT_BOUNDS[("luc", "combined")]
        assert payload["interval"]["lo"] == pytest.approx(lo, abs=1e-9)
        assert payload["interval"]["hi"] == pytest.approx(hi, abs=1e-9)
        assert payload["caveats"] == []

    def test_empty_identified_set_exits_two(self, disagreeing_file, capsys):
        assert main(["bounds", "--moments", str(disagreeing_file)]) == EXIT_INFEASIBLE
        assert "empty" in capsys.readouterr().out

    def test_malformed_moments_exit_three(self, write_file, capsys):
        path = write_file("broken.yaml", "format: lte-moments/1\nk: 2: 3\n")

        assert main(["bounds", "--moments", str(path)]) == EXIT_ERROR
        assert "line 2" in capsys.readouterr().err

    def test_inconsistent_masses_exit_three(self, write_file, capsys):
        path = write_file(
            "short.yaml",
            "format: lte-moments/1\nk: 1\nobservational:\n  - {s: 1, d: 0, mass: 0.5}\n",
        )

        assert main(["bounds", "--moments", str(path)]) == EXIT_ERROR
        assert "observational mass deficit" in capsys.readouterr().err

    def test_missing_file_exits_three(self, tmp_path, capsys):
        assert main(["bounds", "--moments", str(tmp_path / "nope.yaml")]) == EXIT_ERROR
        assert "error: no such file" in capsys.readouterr().err

    def test_custom_without_a_system_exits_three(self, moments_file, capsys):
        code = main(["bounds", "--moments", str(moments_file), "--assumption", "custom"])

        assert code == EXIT_ERROR
        assert "needs a system file" in capsys.readouterr().err

    def test_custom_system_from_file(self, moments_file, write_file, capsys):
        # m(1, s) == m(0, s) at both support points, which is ti written out by hand.
        system = write_file(
            "ti.yaml",
            "k: 2\nequalities:\n"
            "  - {coefficients: [1, 0, -1, 0], rhs: 0}\n"
            "  - {coefficients: [0, 1, 0, -1], rhs: 0}\n",
        )
        main(
            [
                "bounds",
                "--moments",
                str(moments_file),
                "--assumption",
                "custom",
                "--system",
                str(system),
                "--format",
                "json",
            ]
        )

        payload = json.loads(capsys.readouterr().out)
        assert payload["assumption"] == "custom"
        assert payload["interval"]["lo"] == pytest.approx(-0.12, abs=1e-6)
        assert payload["interval"]["hi"] == pytest.approx(0.1333, abs=1e-4)


class TestEstimate:
    def test_exact_samples_reproduce_the_population_bounds(self, sample_files, capsys):
        obs, exp = sample_files

        code = main(
            [
                "estimate",
                "--obs",
                str(obs),
                "--exp",
                str(exp),
                "--assumption",
                "luc",
                "--format",
                "json",
            ]
        )

        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["command"] == "estimate"
        assert payload["interval"]["lo"] == pytest.approx(0.35, abs=1e-9)
        assert payload["interval"]["hi"] == pytest.approx(0.35, abs=1e-9)

    def test_without_an_experiment(self, sample_files, capsys):
        obs, _ = sample_files

        main(["estimate", "--obs", str(obs), "--assumption", "luc"])

        assert "[0.15, 0.4]" in capsys.readouterr().out

    def test_identity_edges_leave_the_bounds_alone(self, sample_files, capsys):
        obs, exp = sample_files

        main(["estimate", "--obs", str(obs), "--exp", str(exp), "--assumption", "luc"])
        coded = capsys.readouterr().out
        main(
            [
                "estimate",
                "--obs",
                str(obs),
                "--exp",
                str(exp),
                "--assumption",
                "luc",
                "--edges",
                "1.5",
            ]
        )

        binned = capsys.readouterr().out
        assert binned == coded
        assert "discretized" not in binned

    def test_lossy_discretization_adds_a_note(self, sample_files, capsys):
        obs, exp = sample_files

        main(
            [
                "estimate",
                "--obs",
                str(obs),
                "--exp",
                str(exp),
                "--assumption",
                "ti",
                "--edges",
                "5",
            ]
        )

        assert "note: s was discretized; ti restricts" in capsys.readouterr().out

    def test_edges_and_quantiles_are_exclusive(self, sample_files):
        obs, _ = sample_files

        with pytest.raises(SystemExit) as exit_info:
            main(["estimate", "--obs", str(obs), "--edges", "1.5", "--quantiles", "2"])

        assert exit_info.value.code == EXIT_ERROR

    def test_covariate_cells_are_combined(self, celled_files, capsys):
        obs, exp = celled_files

        main(
            [
                "estimate",
                "--obs",
                str(obs),
                "--exp",
                str(exp),
                "--assumption",
                "luc",
                "--covariates",
                "x",
                "--format",
                "json",
            ]
        )

        payload = json.loads(capsys.readouterr().out)
        assert [cell["label"] for cell in payload["cells"]] == ["x=0", "x=1"]
        assert [cell["weight"] for cell in payload["cells"]] == [0.5, 0.5]
        assert payload["interval"]["lo"] == pytest.approx(0.35, abs=1e-9)

    def test_weights_from_the_config(self, celled_files, write_file, capsys):
        obs, exp = celled_files
        config = write_file(
            "run.yaml",
            "assumption: luc\ncovariates: [x]\nweights: {x=0: 0.25, x=1: 0.75}\n",
        )

        main(["estimate", "--obs", str(obs), "--exp", str(exp), "--config", str(config)])

        out = capsys.readouterr().out
        assert "luc, 2 cells" in out
        assert "weight 0.2500" in out
        assert "weight 0.7500" in out

    def test_weights_that_do_not_sum_to_one_exit_three(self, celled_files, write_file, capsys):
        obs, exp = celled_files
        config = write_file("run.yaml", "covariates: [x]\nweights: {x=0: 0.5, x=1: 0.6}\n")

        code = main(["estimate", "--obs", str(obs), "--exp", str(exp), "--config", str(config)])

        assert code == EXIT_ERROR
        assert "sum to 1.1" in capsys.readouterr().err

    def test_a_missing_column_exits_three(self, write_file, capsys):
        obs = write_file("obs.csv", "y,d\n0,1\n")

        assert main(["estimate", "--obs", str(obs)]) == EXIT_ERROR
        assert "missing column(s) s" in capsys.readouterr().err

    def test_a_bad_arm_exits_three(self, write_file, capsys):
        obs = write_file("obs.csv", "y,s,d\n0,1,0\n1,2,2\n")

        assert main(["estimate", "--obs", str(obs)]) == EXIT_ERROR
        assert "line 3: d must be 0 or 1" in capsys.readouterr().err


class TestDiagnose:
    def test_worst_case_reports_an_uninformative_experiment(self, moments_file, capsys):
        assert main(["diagnose", "--moments", str(moments_file)]) == EXIT_OK

        out = capsys.readouterr().out
        assert "worst-case/observational" in out
        assert "worst-case/combined" in out
        assert "the experiment adds nothing without assumptions" in out
        assert "matches the solver" in out

    def test_restricted_rows_and_distances(self, moments_file, capsys):
        main(
            [
                "diagnose",
                "--moments",
                str(moments_file),
                "--assumption",
                "luc",
                "--tau",
                str(TWO_POINT_TAU),
                "--format",
                "json",
            ]
        )

        payload = json.loads(capsys.readouterr().out)
        assert payload["command"] == "diagnose"
        assert set(payload["bounds"]) == {
            "worst-case/observational",
            "worst-case/combined",
            "luc/observational",
            "luc/combined",
        }
        assert payload["amplified"] is True
        assert payload["nestingOk"] is True
        # luc/combined is the point 0.35; the true effect is 0.2.
        assert payload["misspecification"]["luc/combined"] == pytest.approx(0.15, abs=1e-9)
        assert payload["misspecification"]["worst-case/combined"] == 0.0


class TestOracle:
    def test_solver_passes_on_the_worked_example(self, moments_file, capsys):
        code = main(
            ["oracle", "--moments", str(moments_file), "--assumption", "ti", "--resolution", "50"]
        )

        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert out.rstrip().endswith("PASS")

    def test_json_format(self, moments_file, capsys):
        main(
            [
                "oracle",
                "--moments",
                str(moments_file),
                "--resolution",
                "50",
                "--format",
                "json",
            ]
        )

        payload = json.loads(capsys.readouterr().out)
        assert payload["command"] == "oracle"
        assert payload["passed"] is True
        assert payload["oracle"]["resolution"] == 50

    def test_infeasible_moments_exit_two(self, disagreeing_file):
        assert main(["oracle", "--moments", str(disagreeing_file)]) == EXIT_INFEASIBLE

    def test_a_failing_certification_exits_one(self, moments_file, monkeypatch):
        monkeypatch.setattr(cli, "certify", _failing_certify)

        assert main(["oracle", "--moments", str(moments_file)]) == EXIT_FAIL

    def test_resolution_must_be_positive(self, moments_file):
        with pytest.raises(SystemExit) as exit_info:
            main(["oracle", "--moments", str(moments_file), "--resolution", "0"])

        assert exit_info.value.code == EXIT_ERROR


def _failing_certify(result, oracle, *, tol_obj):
    return CertificationReport(result, oracle, 0.5, 0.0, 0.01, False)


class TestSimulate:
    def test_writes_both_samples(self, dgp_file, tmp_path, capsys):
        out_dir = tmp_path / "data"

        code = main(
            [
                "simulate",
                "--dgp",
                str(dgp_file),
                "--n",
                "200",
                "--n-exp",
                "150",
                "--out-dir",
                str(out_dir),
            ]
        )

        assert code == EXIT_OK
        observational = pd.read_csv(out_dir / "observational.csv")
        experimental = pd.read_csv(out_dir / "experimental.csv")
        assert list(observational.columns) == ["y", "s", "d"]
        assert list(experimental.columns) == ["s", "d", "z"]
        assert len(observational) == 200
        assert len(experimental) == 150
        out = capsys.readouterr().out
        assert "200 observational records" in out
        assert f"True effect {TWO_POINT_TAU:g}" in out

    def test_the_seed_fixes_the_draw(self, dgp_file, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        for out_dir in (first, second):
            args = ["--dgp", str(dgp_file), "--n", "50", "--seed", "3", "--out-dir", str(out_dir)]
            main(["simulate", *args])

        assert (first / "observational.csv").read_text() == (
            second / "observational.csv"
        ).read_text()

    def test_the_output_feeds_estimate(self, dgp_file, tmp_path, capsys):
        main(["simulate", "--dgp", str(dgp_file), "--n", "500", "--out-dir", str(tmp_path)])
        capsys.readouterr()

        code = main(
            [
                "estimate",
                "--obs",
                str(tmp_path / "observational.csv"),
                "--exp",
                str(tmp_path / "experimental.csv"),
                "--y-low",
                "0",
                "--y-high",
                "1",
            ]
        )

        assert code == EXIT_OK

    def test_an_invalid_process_exits_three(self, write_file, capsys):
        path = write_file("dgp.yaml", "format: lte-dgp/1\nk: 2\ngamma: [[1.0]]\n")

        assert main(["simulate", "--dgp", str(path), "--n", "10"]) == EXIT_ERROR
        assert "error:" in capsys.readouterr().err


class TestConfig:
    def test_flags_override_the_config(self, moments_file, write_file, capsys):
        config = write_file("run.yaml", "assumption: worst-case\nformat: json\n")

        main(
            [
                "bounds",
                "--moments",
                str(moments_file),
                "--config",
                str(config),
                "--assumption",
                "luc",
            ]
        )

        payload = json.loads(capsys.readouterr().out)
        assert payload["assumption"] == "luc"

    def test_an_unknown_key_exits_three(self, moments_file, write_file, capsys):
        config = write_file("run.yaml", "assumptions: luc\n")

        code = main(["bounds", "--moments", str(moments_file), "--config", str(config)])

        assert code == EXIT_ERROR
        assert "assumptions" in capsys.readouterr().err


class TestVerbose:
    def test_logs_go_to_stderr_and_the_handler_is_removed(self, moments_file, capsys):
        logger = logging.getLogger(LOGGER_NAMESPACE)
        before = list(logger.handlers)

        main(["bounds", "--moments", str(moments_file), "-v"])

        captured = capsys.readouterr()
        assert "ltebounds.core.solver" in captured.err
        assert "ltebounds.core.solver" not in captured.out
        assert logger.handlers == before
        assert logger.level == logging.NOTSET


class TestParser:
    def test_a_command_is_required(self):
        with pytest.raises(SystemExit) as exit_info:
            main([])

        assert exit_info.value.code == EXIT_ERROR

    def test_an_unknown_assumption_is_a_usage_error(self, moments_file):
        with pytest.raises(SystemExit) as exit_info:
            main(["bounds", "--moments", str(moments_file), "--assumption", "nope"])

        assert exit_info.value.code == EXIT_ERROR

    def test_module_entry_point(self, moments_file, monkeypatch):
        monkeypatch.setattr(sys, "argv", ["ltebounds", "bounds", "--moments", str(moments_file)])

        with pytest.raises(SystemExit) as exit_info:
            runpy.run_module("ltebounds_cli", run_name="__main__")

        assert exit_info.value.code == EXIT_OK
