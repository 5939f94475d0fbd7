from fractions import Fraction

import pytest

import liouville as lv


@pytest.fixture(autouse=True)
def _default_precision():
    with lv.precision():
        yield


@pytest.fixture(scope="session")
def regime1_small():
    with lv.precision():
        spec = lv.calibrate("I", lv.pq(2, 1), N=3, horizon=70, eps=Fraction(1, 10))
        return lv.build(spec)


@pytest.fixture(scope="session")
def regime3_small():
    with lv.precision():
        spec = lv.calibrate("III", lv.pq(-1, Fraction(3, 2)), N=3, horizon=70,
                            eps=Fraction(1, 10))
        return lv.build(spec)


@pytest.fixture(scope="session")
def regime4_walk():
    with lv.precision():
        spec = lv.calibrate("IV", lv.pq(-2, 1), N=3, horizon=1005, lam=Fraction(1))
        return lv.build(spec)


@pytest.fixture(scope="session")
def regime5_walk():
    with lv.precision():
        spec = lv.calibrate("V1", lv.pq(Fraction(1, 2), Fraction(1, 2)), N=3, horizon=1005)
        return lv.build(spec)
