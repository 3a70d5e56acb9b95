from fractions import Fraction

import pytest
from hypothesis import settings

from fmbounds.geometry import canonical_triangle

settings.register_profile("repro", derandomize=True, deadline=None, print_blob=True)
settings.load_profile("repro")


@pytest.fixture
def equilateral_proxy():
    # rational vertex within 1e-6 of (1/2, sqrt(3)/2)
    return canonical_triangle(Fraction(1, 2), Fraction(433013, 500000))


@pytest.fixture
def right_triangle():
    return canonical_triangle(0, 1)
