import warnings

import pytest

from nlslab.dynamics import NlsParams, bright_soliton
from nlslab.spectral import make_grid


@pytest.fixture
def focusing():
    return NlsParams(sigma=-1, lam=1.0, p=3)


@pytest.fixture
def defocusing():
    return NlsParams(sigma=1, lam=1.0, p=3)


@pytest.fixture
def box():
    return make_grid(256, 40.0)


@pytest.fixture
def soliton(box):
    # sech(20) trips the 1e-10 tail warning; harmless at these tolerances
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return bright_soliton(1.0, 0.0, box)
