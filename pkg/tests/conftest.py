from fractions import Fraction

import pytest

from carnotpoly import build_free
from carnotpoly.algebra import GradedLieAlgebra
from carnotpoly.extremal import build_family
from carnotpoly.group import left_invariant_fields
from carnotpoly.prolongation import prolong

# the elementary-matrix g_0 basis of free(2,4): maps sending (X_1, X_2) to
# (0, X_1), (0, X_2), (X_1, 0), (X_2, 0), in ascending index order -3..0
ELEMENTARY_G0 = [
    [[0, 1], [0, 0]],
    [[0, 0], [0, 1]],
    [[1, 0], [0, 0]],
    [[0, 0], [1, 0]],
]


def heisenberg_algebra():
    return GradedLieAlgebra({1: 1, 2: 1, 3: 2}, {(2, 1): {3: Fraction(1)}})


@pytest.fixture(scope="session")
def heisenberg():
    return heisenberg_algebra()


@pytest.fixture(scope="session")
def free24():
    return build_free(2, 4)[0]


@pytest.fixture(scope="session")
def free24_words():
    return build_free(2, 4)[1]


@pytest.fixture(scope="session")
def free23():
    return build_free(2, 3)[0]


@pytest.fixture(scope="session")
def free34():
    return build_free(3, 4)[0]


@pytest.fixture(scope="session")
def free24_prolonged(free24):
    return prolong(free24, 3, basis_overrides={0: ELEMENTARY_G0})


@pytest.fixture(scope="session")
def free24_family(free24_prolonged):
    return build_family(free24_prolonged)


@pytest.fixture(scope="session")
def free24_fields(free24):
    return left_invariant_fields(free24)


@pytest.fixture(scope="session")
def free34_prolonged(free34):
    return prolong(free34, 2)


@pytest.fixture(scope="session")
def heis_family(heisenberg):
    return build_family(heisenberg)
