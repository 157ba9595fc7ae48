import math

import pytest

from freeconv.density import density_grid
from freeconv.measure import make_arcsine, make_marchenko_pastur, make_semicircle
from freeconv.support import find_support

SQRT2 = math.sqrt(2.0)


@pytest.fixture(scope="session")
def sc1():
    return make_semicircle(1.0)


@pytest.fixture(scope="session")
def sc4():
    return make_semicircle(4.0)


@pytest.fixture(scope="session")
def arc2():
    return make_arcsine(2.0)


@pytest.fixture(scope="session")
def mp_quarter():
    return make_marchenko_pastur(0.25)


@pytest.fixture(scope="session")
def support_11(sc1):
    return find_support(sc1, sc1)


@pytest.fixture(scope="session")
def grid_11(sc1, support_11):
    return density_grid(sc1, sc1, support_11, n=129)


@pytest.fixture(scope="session")
def support_sc_arc(sc1, arc2):
    return find_support(sc1, arc2)
