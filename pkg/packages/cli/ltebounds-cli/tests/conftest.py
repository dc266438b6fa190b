"""Shared fixtures: input files on disk, written as text so tests can break them."""

from __future__ import annotations

from collections.abc import Callable
from pathlib import Path

import pandas as pd
import pytest
import yaml

from ltebounds_testing import exact_samples, two_point_dgp, two_point_moments

TWO_POINT_MOMENTS = """\
format: lte-moments/1
k: 2
z_count: 2
observational:
  - {s: 1, d: 0, mass: 0.3, mean: 0.2}
  - {s: 2, d: 0, mass: 0.2, mean: 0.4}
  - {s: 1, d: 1, mass: 0.2, mean: 0.4}
  - {s: 2, d: 1, mass: 0.3, mean: 0.7}
experimental:
  - {z: 1, s: 1, d: 0, mass: 0.7}
  - {z: 1, s: 2, d: 0, mass: 0.3}
  - {z: 2, s: 1, d: 1, mass: 0.3}
  - {z: 2, s: 2, d: 1, mass: 0.7}
"""

# The two instrument values push the treated lower bounds past one.
DISAGREEING_MOMENTS = """\
format: lte-moments/1
k: 2
z_count: 2
observational:
  - {s: 1, d: 0, mass: 0.25, mean: 0.6}
  - {s: 2, d: 0, mass: 0.25, mean: 0.6}
  - {s: 1, d: 1, mass: 0.25, mean: 0.6}
  - {s: 2, d: 1, mass: 0.25, mean: 0.6}
experimental:
  - {z: 1, s: 1, d: 1, mass: 0.52}
  - {z: 1, s: 2, d: 1, mass: 0.48}
  - {z: 2, s: 1, d: 1, mass: 0.48}
  - {z: 2, s: 2, d: 1, mass: 0.52}
"""


@pytest.fixture
def write_file(tmp_path: Path) -> Callable[[str, str], Path]:
    """Write text to a file under the test's temporary directory."""

    def _write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        return path

    return _write


@pytest.fixture
def moments_file(write_file) -> Path:
    """The worked example as a moments file."""
    return write_file("two-point.yaml", TWO_POINT_MOMENTS)


@pytest.fixture
def disagreeing_file(write_file) -> Path:
    """Moments whose identified set is empty."""
    return write_file("disagreeing.yaml", DISAGREEING_MOMENTS)


@pytest.fixture
def dgp_file(write_file) -> Path:
    """The worked example as a process file."""
    dgp = two_point_dgp()
    document = {
        "format": "lte-dgp/1",
        "k": dgp.k,
        "z_count": dgp.support.z_count,
        "gamma": dgp.gamma.tolist(),
        "link": dgp.link.tolist(),
        "propensity": dgp.propensity.tolist(),
        "observed_mean": dgp.observed_mean.tolist(),
        "treat_prob": dgp.treat_prob.tolist(),
    }
    return write_file("two-point-dgp.yaml", yaml.safe_dump(document))


@pytest.fixture
def sample_files(tmp_path: Path) -> tuple[Path, Path]:
    """Worked-example samples of 100 records whose empirical moments are exact."""
    obs, exp = exact_samples(two_point_moments(), 100)
    obs_path = tmp_path / "observational.csv"
    exp_path = tmp_path / "experimental.csv"
    pd.DataFrame({"y": obs.y, "s": obs.s, "d": obs.d}).to_csv(obs_path, index=False)
    pd.DataFrame({"s": exp.s, "d": exp.d, "z": exp.z}).to_csv(exp_path, index=False)
    return obs_path, exp_path


@pytest.fixture
def celled_files(tmp_path: Path) -> tuple[Path, Path]:
    """The worked-example samples twice over, once per value of covariate ``x``."""
    obs, exp = exact_samples(two_point_moments(), 100)
    observational = pd.DataFrame({"y": obs.y, "s": obs.s, "d": obs.d})
    experimental = pd.DataFrame({"s": exp.s, "d": exp.d, "z": exp.z})
    obs_path = tmp_path / "observational.csv"
    exp_path = tmp_path / "experimental.csv"
    pd.concat([observational.assign(x=0), observational.assign(x=1)]).to_csv(
        obs_path, index=False
    )
    pd.concat([experimental.assign(x=0), experimental.assign(x=1)]).to_csv(
        exp_path, index=False
    )
    return obs_path, exp_path
