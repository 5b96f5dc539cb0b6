"""Shared fixtures: three hand-checkable unit spherical matrices.

SQUARE: vertices of a square inscribed in the unit circle; regular, with
    w = e/8 and a one-column Gale basis proportional to (1,-1,1,-1).
ANTIPODAL: an antipodal pair plus two points mirrored across its axis,
    in R^3; w = (1/4, 1/4, 0, 0).
TRIANGLE: an isosceles triangle on the unit circle with squared side
    lengths (1, 1, 3); w = (1/2, -1/2, 1/2).
"""

import numpy as np
import pytest

from edmp import DistanceMatrix, profile

SQUARE = np.array(
    [[0, 2, 4, 2], [2, 0, 2, 4], [4, 2, 0, 2], [2, 4, 2, 0]], dtype=float
)
ANTIPODAL = np.array(
    [[0, 4, 2, 2], [4, 0, 2, 2], [2, 2, 0, 2], [2, 2, 2, 0]], dtype=float
)
TRIANGLE = np.array([[0, 1, 3], [1, 0, 1], [3, 1, 0]], dtype=float)


@pytest.fixture(scope="session")
def square():
    return DistanceMatrix(SQUARE)


@pytest.fixture(scope="session")
def square_profile(square):
    return profile(square)


@pytest.fixture(scope="session")
def antipodal():
    return DistanceMatrix(ANTIPODAL)


@pytest.fixture(scope="session")
def antipodal_profile(antipodal):
    return profile(antipodal)


@pytest.fixture(scope="session")
def triangle():
    return DistanceMatrix(TRIANGLE)


@pytest.fixture(scope="session")
def triangle_profile(triangle):
    return profile(triangle)
