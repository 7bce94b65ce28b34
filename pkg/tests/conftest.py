import sys

import numpy as np
import pytest

from flexsmc import config, fixtures, workflow
from flexsmc.modal import BeamParams, modal_analysis


@pytest.fixture(scope="session")
def beam():
    return BeamParams(**fixtures.BEAM)


@pytest.fixture(scope="session")
def cfg():
    return config.ProjectConfig()


@pytest.fixture(scope="session")
def modal5(beam):
    return modal_analysis(beam, 5)


@pytest.fixture(scope="session")
def plants(cfg):
    """(two-mode design plant, five-mode plant) built from the tabulated mode data."""
    return workflow.plants(cfg)


@pytest.fixture(scope="session")
def design(plants):
    return plants[0]


@pytest.fixture(scope="session")
def spec(cfg, design):
    return workflow.sliding_spec(cfg, design)


@pytest.fixture(scope="session")
def observer(cfg, design, spec):
    return workflow.synthesize_observer(cfg, design, spec)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
