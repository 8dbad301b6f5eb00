import logging

import numpy as np
import pytest

from kraus_thermo.channel import Channel
from kraus_thermo.measure import (build_family, example1_family, four_projector_measure,
                                  from_gaussian_rotation, from_markov_chain)

P_STAR = np.array([[0.5, 0.3], [0.5, 0.7]])


@pytest.fixture(autouse=True)
def _quiet_pruning(caplog):
    caplog.set_level(logging.ERROR, logger="kraus_thermo.measure")


@pytest.fixture(scope="session")
def fix_mc():
    return from_markov_chain(P_STAR)[1]


@pytest.fixture(scope="session")
def fix_4proj():
    return build_family(four_projector_measure())


@pytest.fixture(scope="session")
def fix_shift():
    return example1_family(mass_tol=1e-4)[1]


@pytest.fixture(scope="session")
def fix_gauss():
    return from_gaussian_rotation(40, 32)[1]


@pytest.fixture(scope="session")
def mc_channel(fix_mc):
    return Channel(fix_mc)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS, key=int):
            terminalreporter.write_line(RESULTS[key])
