from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from neutralvsi import jets
from neutralvsi.families import NULL_CHART, ST_BOX, ST_CHART, UNIT_BOX
from neutralvsi.jets import Jet
from neutralvsi.sampling import sample_points

NULL_BOX = {n: UNIT_BOX for n in NULL_CHART.names}


def make_jet(coeffs, order, mode="rational"):
    c = jets.zeros((), order, mode)
    for k, v in enumerate(coeffs):
        c[k] = jets.coerce(v, mode)
    return Jet(c, order, mode)


small_fractions = st.fractions(min_value=-4, max_value=4, max_denominator=6)


def jet_strategy(order=2, mode="rational"):
    n = jets.ncoef(order)
    return st.lists(small_fractions, min_size=n, max_size=n).map(lambda c: make_jet(c, order, mode))


def as_float_array(x):
    return np.array(x, dtype=float)


@pytest.fixture
def null_points():
    return sample_points(NULL_BOX, NULL_CHART.names, 4, seed=11)


@pytest.fixture
def null_points_float():
    return sample_points(NULL_BOX, NULL_CHART.names, 4, seed=11, mode="float")


@pytest.fixture
def st_points():
    return sample_points(ST_BOX, ST_CHART.names, 4, seed=12)


@pytest.fixture
def half():
    return Fraction(1, 2)
