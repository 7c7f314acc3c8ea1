import math

import pytest

from blochfb import (
    BlochState,
    OCConfig,
    ReservoirParams,
    build_coefficient_table,
)

# the published simulation initial state (sqrt2/4, sqrt2/4, sqrt3/2); pure
S0 = BlochState(math.sqrt(2) / 4, math.sqrt(2) / 4, math.sqrt(3) / 2)


@pytest.fixture(scope="session")
def s0():
    return S0


@pytest.fixture(scope="session")
def params():
    """The r=0.5, kBT=10 working point used throughout the experiments."""
    return ReservoirParams.from_ratio(0.5, kBT=10.0)


@pytest.fixture(scope="session")
def table(params):
    """Rate table covering the control and simulation horizons."""
    return build_coefficient_table(params, 16.0, 0.01)


@pytest.fixture(scope="session")
def zero_rate_params():
    """No thermal channels (alpha = 0), measurement on."""
    return ReservoirParams.from_ratio(0.5, kBT=10.0, alpha_sq=0.0)


@pytest.fixture(scope="session")
def zero_rate_table(zero_rate_params):
    return build_coefficient_table(
        zero_rate_params, 16.0, 0.01, constant_rates=(0.0, 0.0)
    )


@pytest.fixture(scope="session")
def oc_default():
    return OCConfig(theta=1.0, relaxation=0.3, tol=1e-6, max_iter=500,
                    dt=0.005, t_max=15.0)
