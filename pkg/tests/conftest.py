import sys

import numpy as np
import pytest

from gammalab import ChannelParams, Gamma, GammaMixture


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def exp_channel():
    return Gamma(1.0, 1.0), ChannelParams(1.0, 1.0, 1.0)


@pytest.fixture
def mean_matched_mixture():
    # E[X] = 0.4*0.5 + 0.6*(4/3) = 1.0 = alpha/lam for alpha = lam = 1
    return GammaMixture([0.4, 0.6], [Gamma(1.0, 2.0), Gamma(4.0, 3.0)])



def pytest_terminal_summary(terminalreporter):
    """One verdict line per acceptance criterion, when the acceptance module ran."""
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
