"""Bivariate polynomials with rational coefficients and exact integration.

Polynomials are written in coordinates relative to a chosen origin (usually a
vertex of the triangle they live on).  With the origin at a vertex the affine
pull-back to the reference triangle is linear, so every moment integral is a
short sum of ``p! q! / (p+q+2)!`` terms.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from .geometry import Point2, Triangle, cross


class Poly:
    """Sparse polynomial ``sum c[i,j] u^i v^j``."""

    __slots__ = ("c",)

    def __init__(self, coeffs=None):
        self.c = {k: Fraction(v) for k, v in (coeffs or {}).items() if v != 0}

    @classmethod
    def monomial(cls, i: int, j: int, coef=1) -> "Poly":
        return cls({(i, j): coef})

    @classmethod
    def const(cls, v) -> "Poly":
        return cls({(0, 0): v})

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.c), default=-1)

    def __add__(self, other):
        other = other if isinstance(other, Poly) else Poly.const(other)
        out = dict(self.c)
        for k, v in other.c.items():
            out[k] = out.get(k, 0) + v
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({k: -v for k, v in self.c.items()})

    def __sub__(self, other):
        return self + (-(other if isinstance(other, Poly) else Poly.const(other)))

    def __mul__(self, other):
        if not isinstance(other, Poly):
            s = Fraction(other)
            return Poly({k: v * s for k, v in self.c.items()})
        out: dict = {}
        for (i, j), a in self.c.items():
            for (k, l), b in other.c.items():
                key = (i + k, j + l)
                out[key] = out.get(key, 0) + a * b
        return Poly(out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.c == other.c

    def dx(self) -> "Poly":
        return Poly({(i - 1, j): v * i for (i, j), v in self.c.items() if i})

    def dy(self) -> "Poly":
        return Poly({(i, j - 1): v * j for (i, j), v in self.c.items() if j})

    def __call__(self, x, y) -> Fraction:
        x, y = Fraction(x), Fraction(y)
        return sum((v * x**i * y**j for (i, j), v in self.c.items()), Fraction(0))

    def shifted(self, dx, dy) -> "Poly":
        """q(u, v) = p(u + dx, v + dy)."""
        out = Poly()
        dx, dy = Fraction(dx), Fraction(dy)
        for (i, j), v in self.c.items():
            for a in range(i + 1):
                for b in range(j + 1):
                    w = v * comb(i, a) * comb(j, b) * dx ** (i - a) * dy ** (j - b)
                    if w:
                        out.c[(a, b)] = out.c.get((a, b), 0) + w
        out.c = {k: v for k, v in out.c.items() if v}
        return out

    def __repr__(self) -> str:
        terms = " + ".join(f"{v}*u^{i}v^{j}" for (i, j), v in sorted(self.c.items()))
        return f"Poly({terms or '0'})"


def monomials(m: int) -> list[tuple[int, int]]:
    """Exponents of P^m ordered by total degree."""
    return [(d - j, j) for d in range(m + 1) for j in range(d + 1)]


@lru_cache(maxsize=None)
def _ref_moment(p: int, q: int) -> Fraction:
    return Fraction(factorial(p) * factorial(q), factorial(p + q + 2))


def _lin_pow(ax, bx, n):
    # coefficients of (ax*s + bx*t)^n indexed by the power of s
    return [comb(n, k) * ax**k * bx ** (n - k) for k in range(n + 1)]


class TriangleMoments:
    """Exact moments ``int_T u^i v^j`` with (u, v) measured from ``t.o``."""

    def __init__(self, t: Triangle, max_degree: int):
        self.t = t
        self.area2 = abs(t.area2)
        e1, e2 = t.a - t.o, t.b - t.o
        self._e1, self._e2 = e1, e2
        self.max_degree = max_degree
        self._cache: dict = {}

    def __getitem__(self, key: tuple[int, int]) -> Fraction:
        m = self._cache.get(key)
        if m is None:
            i, j = key
            e1, e2 = self._e1, self._e2
            # u = e1.x*s + e2.x*t, v = e1.y*s + e2.y*t on the reference triangle
            pu = _lin_pow(e1.x, e2.x, i)
            pv = _lin_pow(e1.y, e2.y, j)
            total = Fraction(0)
            for a, ca in enumerate(pu):
                if ca:
                    for b, cb in enumerate(pv):
                        if cb:
                            s = a + b
                            total += ca * cb * _ref_moment(s, i + j - s)
            m = self.area2 * total
            self._cache[key] = m
        return m

    def integrate(self, p: Poly) -> Fraction:
        return sum((v * self[k] for k, v in p.c.items()), Fraction(0))

    def inner(self, p: Poly, q: Poly) -> Fraction:
        total = Fraction(0)
        for (i, j), a in p.c.items():
            for (k, l), b in q.c.items():
                total += a * b * self[(i + k, j + l)]
        return total


def segment_integral(p: Poly, p0: Point2, p1: Point2) -> Fraction:
    """int_0^1 p(p0 + s (p1 - p0)) ds (unit parameter, not arc length)."""
    dx, dy = p1.x - p0.x, p1.y - p0.y
    total = Fraction(0)
    for (i, j), v in p.c.items():
        # (x0 + s dx)^i (y0 + s dy)^j expanded in s
        cu = [comb(i, k) * p0.x ** (i - k) * dx**k for k in range(i + 1)]
        cv = [comb(j, k) * p0.y ** (j - k) * dy**k for k in range(j + 1)]
        for a, ca in enumerate(cu):
            if ca:
                for b, cb in enumerate(cv):
                    if cb:
                        total += v * ca * cb / (a + b + 1)
    return total


def normal_moment(p: Poly, p0: Point2, p1: Point2) -> Fraction:
    """int_e dp/dn ds on the segment p0 -> p1 with normal (t_y, -t_x)/|t|.

    The |e| from ds cancels the 1/|e| of the unit normal, so the result is
    rational.
    """
    tx, ty = p1.x - p0.x, p1.y - p0.y
    g = p.dx() * ty - p.dy() * tx
    return segment_integral(g, p0, p1)


def grad_inner(mom: TriangleMoments, p: Poly, q: Poly) -> Fraction:
    return mom.inner(p.dx(), q.dx()) + mom.inner(p.dy(), q.dy())


def hess_inner(mom: TriangleMoments, p: Poly, q: Poly) -> Fraction:
    pxx, pxy, pyy = p.dx().dx(), p.dx().dy(), p.dy().dy()
    qxx, qxy, qyy = q.dx().dx(), q.dx().dy(), q.dy().dy()
    return mom.inner(pxx, qxx) + 2 * mom.inner(pxy, qxy) + mom.inner(pyy, qyy)


def is_ccw(t: Triangle) -> bool:
    return cross(t.a - t.o, t.b - t.o) > 0
