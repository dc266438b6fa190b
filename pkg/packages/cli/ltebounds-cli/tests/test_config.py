"""Tests for the file schemas and the run config."""

from __future__ import annotations

import numpy as np
import pytest
from pydantic import ValidationError

from ltebounds_cli.config import (
    CustomSystemDocument,
    DgpDocument,
    DiscretizationDocument,
    MomentsDocument,
    RunConfig,
    build_assumption,
)
from ltebounds_cli.exceptions import CliError
from ltebounds_cli.samples import BinningMode
from ltebounds_core import AssumptionKind, Direction, LinearSystem, Scope


def _moments(**overrides):
    document = {
        "format": "lte-moments/1",
        "k": 2,
        "observational": [
            {"s": 1, "d": 0, "mass": 0.5, "mean": 5.0},
            {"s": 2, "d": 1, "mass": 0.5, "mean": 10.0},
        ],
        "y_high": 10.0,
    }
    return {**document, **overrides}


class TestMomentsDocument:
    def test_means_are_normalized(self):
        pm = MomentsDocument.model_validate(_moments()).to_moments()

        assert pm.obs.mean[0, 0] == 0.5
        assert pm.obs.mean[1, 1] == 1.0
        assert pm.support.scale == 10.0
        assert pm.exp is None

    def test_unlisted_cells_have_no_mass(self):
        pm = MomentsDocument.model_validate(_moments()).to_moments()

        assert pm.obs.mass[0, 1] == 0.0
        assert pm.obs.mass[1, 0] == 0.0

    def test_experimental_blocks(self):
        document = _moments(
            z_count=2,
            experimental=[
                {"z": 1, "s": 1, "d": 0, "mass": 1.0},
                {"z": 2, "s": 2, "d": 1, "mass": 1.0},
            ],
        )

        pm = MomentsDocument.model_validate(document).to_moments()

        assert pm.exp.mass.shape == (2, 2, 2)
        assert pm.exp.mass[1, 1, 1] == 1.0

    def test_format_is_required(self):
        document = _moments()
        del document["format"]

        with pytest.raises(ValidationError, match="format"):
            MomentsDocument.model_validate(document)

    def test_unknown_fields_are_rejected(self):
        with pytest.raises(ValidationError, match="Extra inputs"):
            MomentsDocument.model_validate(_moments(comment="hi"))

    def test_support_point_beyond_k(self):
        cells = [{"s": 3, "d": 0, "mass": 1.0}]

        with pytest.raises(ValidationError, match="exceeds k = 2"):
            MomentsDocument.model_validate(_moments(observational=cells))

    def test_duplicate_cells(self):
        cells = [{"s": 1, "d": 0, "mass": 0.5}, {"s": 1, "d": 0, "mass": 0.5}]

        with pytest.raises(ValidationError, match="listed twice"):
            MomentsDocument.model_validate(_moments(observational=cells))

    def test_instrument_beyond_z_count(self):
        cells = [{"z": 2, "s": 1, "d": 0, "mass": 1.0}]

        with pytest.raises(ValidationError, match="exceeds z_count = 1"):
            MomentsDocument.model_validate(_moments(experimental=cells))

    def test_empty_outcome_range(self):
        with pytest.raises(ValidationError, match="must be below"):
            MomentsDocument.model_validate(_moments(y_low=10.0))

    def test_arm_must_be_zero_or_one(self):
        cells = [{"s": 1, "d": 2, "mass": 1.0}]

        with pytest.raises(ValidationError):
            MomentsDocument.model_validate(_moments(observational=cells))

    def test_description_lists_positive_cells_on_the_original_scale(self, two_point_moments):
        document = MomentsDocument.from_moments(two_point_moments)

        assert len(document.observational) == 4
        assert len(document.experimental) == 4
        assert {cell.z for cell in document.experimental} == {1, 2}


class TestDgpDocument:
    def test_tables_must_be_two_by_k(self):
        document = {
            "format": "lte-dgp/1",
            "k": 2,
            "gamma": [[0.5, 0.5]],
            "link": [[0.5, 0.5], [0.5, 0.5]],
            "propensity": [[0.5, 0.5], [0.5, 0.5]],
            "observed_mean": [[0.5, 0.5], [0.5, 0.5]],
            "treat_prob": [0.5],
        }

        with pytest.raises(ValidationError, match="gamma must be two rows"):
            DgpDocument.model_validate(document)

    def test_links_are_normalized(self):
        document = DgpDocument.model_validate(
            {
                "format": "lte-dgp/1",
                "k": 1,
                "y_high": 4.0,
                "gamma": [[1.0], [1.0]],
                "link": [[2.0], [3.0]],
                "propensity": [[0.5], [0.5]],
                "observed_mean": [[2.0], [3.0]],
                "treat_prob": [0.5],
            }
        )

        dgp = document.to_dgp()

        assert np.allclose(dgp.link, [[0.5], [0.75]])
        assert dgp.tau == pytest.approx(1.0)


class TestCustomSystemDocument:
    def test_rows_become_a_system(self):
        document = CustomSystemDocument.model_validate(
            {"k": 1, "inequalities": [{"coefficients": [-1, 1], "rhs": 0}]}
        )

        system = document.to_system()

        assert isinstance(system, LinearSystem)
        assert system.k == 1

    def test_rows_need_two_k_coefficients(self):
        with pytest.raises(ValidationError, match="2k = 4"):
            CustomSystemDocument.model_validate(
                {"k": 2, "equalities": [{"coefficients": [1, -1], "rhs": 0}]}
            )

    def test_a_system_needs_a_row(self):
        with pytest.raises(ValidationError, match="at least one row"):
            CustomSystemDocument.model_validate({"k": 2})


class TestDiscretizationDocument:
    def test_quantile_mode_needs_q(self):
        with pytest.raises(ValidationError, match="needs q"):
            DiscretizationDocument.model_validate({"mode": "quantile"})

    def test_explicit_mode_needs_edges(self):
        with pytest.raises(ValidationError, match="needs edges"):
            DiscretizationDocument.model_validate({"mode": "explicit"})

    def test_to_spec(self):
        document = DiscretizationDocument.model_validate(
            {"mode": "quantile", "q": 5, "order": "decreasing"}
        )

        spec = document.to_spec()

        assert spec.mode is BinningMode.QUANTILE
        assert spec.q == 5
        assert spec.order is Direction.DECREASING


class TestRunConfig:
    def test_defaults(self):
        config = RunConfig()

        assert config.assumption is AssumptionKind.WORST_CASE
        assert config.scope is Scope.COMBINED
        assert config.resolution == 400
        assert config.format == "text"

    def test_solver_settings_keep_unset_defaults(self):
        config = RunConfig.model_validate({"scope": "observational", "solver": {"seed": 9}})

        cfg = config.solver_config()

        assert cfg.seed == 9
        assert cfg.scope is Scope.OBSERVATIONAL
        assert cfg.multistarts == type(cfg)().multistarts

    def test_negative_weights(self):
        with pytest.raises(ValidationError, match="nonnegative: x=1"):
            RunConfig.model_validate({"weights": {"x=0": 1.5, "x=1": -0.5}})

    def test_resolution_floor(self):
        with pytest.raises(ValidationError):
            RunConfig.model_validate({"resolution": 5})


class TestBuildAssumption:
    def test_direction_is_kept_for_liv(self):
        a = build_assumption(AssumptionKind.LIV, Direction.DECREASING)

        assert a.label == "liv(decreasing)"

    def test_custom_needs_a_system(self):
        with pytest.raises(CliError, match="needs a system file"):
            build_assumption(AssumptionKind.CUSTOM, Direction.INCREASING)

    def test_a_system_only_goes_with_custom(self):
        system = LinearSystem(1, a_eq=[[1.0, -1.0]], b_eq=[0.0])

        with pytest.raises(CliError, match="only applies to the custom"):
            build_assumption(AssumptionKind.TI, Direction.INCREASING, system)
