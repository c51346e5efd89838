import numpy as np
import pytest

from kvwave import assemble_generator, build_grid, reference_config, undamped_config

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


def make_generator(cfg, n):
    return assemble_generator(cfg, build_grid(cfg, n))


@pytest.fixture(scope="session")
def ref_generators():
    """Reference C1/C2/C3 generators at a moderate resolution."""
    return {case: make_generator(reference_config(case), 60) for case in ("C1", "C2", "C3")}


@pytest.fixture(scope="session")
def undamped_small():
    return make_generator(undamped_config(), 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
