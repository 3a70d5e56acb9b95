from fractions import Fraction
from math import factorial

from hypothesis import given, strategies as st

from fmbounds.geometry import Point2, canonical_triangle, make_triangle
from fmbounds.polynomial import Poly, TriangleMoments, monomials, normal_moment, segment_integral


def test_reference_moments():
    ref = make_triangle((0, 0), (1, 0), (0, 1))
    mom = TriangleMoments(ref, 6)
    for i, j in monomials(6):
        assert mom[(i, j)] == Fraction(factorial(i) * factorial(j), factorial(i + j + 2))


def test_area_and_centroid():
    t = canonical_triangle(Fraction(3, 5), Fraction(2, 7))
    mom = TriangleMoments(t, 2)
    area = abs(t.area2) / 2
    assert mom[(0, 0)] == area
    assert mom[(1, 0)] == area * (0 + 1 + Fraction(3, 5)) / 3
    assert mom[(0, 1)] == area * Fraction(2, 7) / 3


@given(st.integers(-3, 3), st.integers(-3, 3))
def test_moments_are_translation_consistent(dx, dy):
    # moments about t.o of the shifted polynomial equal those of a translated triangle
    t = make_triangle((0, 0), (2, 1), (1, 3))
    s = make_triangle((dx, dy), (2 + dx, 1 + dy), (1 + dx, 3 + dy))
    p = Poly({(2, 1): 3, (0, 3): -1, (1, 0): 5})
    assert TriangleMoments(t, 4).integrate(p) == TriangleMoments(s, 4).integrate(p)


def test_shift_and_derivatives():
    p = Poly({(2, 0): 1, (1, 1): 2, (0, 0): -3})
    q = p.shifted(1, -1)
    for x, y in ((0, 0), (2, 5), (Fraction(1, 3), -2)):
        assert q(x, y) == p(x + 1, y - 1)
    assert p.dx() == Poly({(1, 0): 2, (0, 1): 2})
    assert p.dy() == Poly({(1, 0): 2})
    assert p.degree == 2 and Poly().degree == -1


def test_segment_and_normal_moments():
    p0, p1 = Point2(0, 0), Point2(2, 0)
    x = Poly.monomial(1, 0)
    assert segment_integral(x, p0, p1) == 1  # mean of x on [0, 2]
    # d/dn of y on the bottom edge with normal (t_y, -t_x) = (0, -2)/2, times length 2
    assert normal_moment(Poly.monomial(0, 1), p0, p1) == -2
