import numpy as np
import pytest

from kpotential import RadialProfile, make_params

PARAM_SETS = [(1, 0.5), (2, 0.5), (3, 1.0)]


@pytest.fixture(params=PARAM_SETS, ids=lambda p: f"n{p[0]}-g{p[1]:g}")
def params(request):
    return make_params(*request.param)


@pytest.fixture
def params2():
    return make_params(2, 0.5)


def exp_profile():
    return RadialProfile(lambda r: np.exp(-r), label="exp(-r)")


def rexp_profile():
    return RadialProfile(lambda r: r * np.exp(-r), label="r exp(-r)")
