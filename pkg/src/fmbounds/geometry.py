"""Triangles, shape maps, red-refined meshes and the arc sampling grids."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .interval import BoundInterval, PI, as_fraction, sin_cos, sqrt_bounds

MAX_LEVEL = 8


class DegenerateTriangleError(ValueError):
    pass


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class Point2:
    x: Fraction
    y: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x", as_fraction(self.x))
        object.__setattr__(self, "y", as_fraction(self.y))

    def __sub__(self, other: "Point2") -> "Point2":
        return Point2(self.x - other.x, self.y - other.y)

    def __add__(self, other: "Point2") -> "Point2":
        return Point2(self.x + other.x, self.y + other.y)

    def scale(self, s) -> "Point2":
        s = as_fraction(s)
        return Point2(self.x * s, self.y * s)

    def norm2(self) -> Fraction:
        return self.x * self.x + self.y * self.y

    def __iter__(self):
        yield self.x
        yield self.y


def cross(u: Point2, v: Point2) -> Fraction:
    return u.x * v.y - u.y * v.x


@dataclass(frozen=True)
class Triangle:
    """Triangle with exact rational vertices, positively oriented."""

    o: Point2
    a: Point2
    b: Point2

    @property
    def vertices(self) -> tuple[Point2, Point2, Point2]:
        return (self.o, self.a, self.b)

    @property
    def area2(self) -> Fraction:
        """Twice the signed area."""
        return cross(self.a - self.o, self.b - self.o)

    @property
    def area(self) -> Fraction:
        return self.area2 / 2

    @property
    def diam2(self) -> Fraction:
        return max((self.a - self.o).norm2(), (self.b - self.a).norm2(), (self.o - self.b).norm2())

    @property
    def diam(self) -> BoundInterval:
        lo, hi = sqrt_bounds(self.diam2)
        return BoundInterval(lo, hi)

    def scaled(self, s) -> "Triangle":
        s = as_fraction(s)
        return Triangle(self.o.scale(s), self.a.scale(s), self.b.scale(s))


def make_triangle(o, a, b) -> Triangle:
    """Build a positively oriented triangle; B and A are swapped if needed."""
    o, a, b = (p if isinstance(p, Point2) else Point2(*p) for p in (o, a, b))
    area2 = cross(a - o, b - o)
    if area2 == 0:
        raise DegenerateTriangleError(f"zero-area triangle {o}, {a}, {b}")
    if area2 < 0:
        a, b = b, a
    return Triangle(o, a, b)


def canonical_triangle(bx, by) -> Triangle:
    """Triangle O(0,0), A(1,0), B(bx, by)."""
    return make_triangle(Point2(0, 0), Point2(1, 0), Point2(bx, by))


@dataclass(frozen=True)
class OmegaPoint:
    a: Fraction
    b: Fraction

    def __post_init__(self):
        a, b = as_fraction(self.a), as_fraction(self.b)
        if not (a * a + b * b <= 1 and a >= Fraction(1, 2) and b > 0):
            raise DomainError(f"({a}, {b}) is outside the region of vertex B")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def triangle(self) -> Triangle:
        return canonical_triangle(self.a, self.b)


@dataclass(frozen=True)
class PiAngle:
    """The angle ``frac * pi``, kept symbolic."""

    frac: Fraction

    def __post_init__(self):
        object.__setattr__(self, "frac", as_fraction(self.frac))

    def radians(self) -> BoundInterval:
        return PI * self.frac

    def __add__(self, other: "PiAngle") -> "PiAngle":
        return PiAngle(self.frac + other.frac)

    def __sub__(self, other: "PiAngle") -> "PiAngle":
        return PiAngle(self.frac - other.frac)

    def __truediv__(self, k) -> "PiAngle":
        return PiAngle(self.frac / as_fraction(k))

    def __float__(self) -> float:
        return float(self.frac) * 3.141592653589793


AngleLike = Union[PiAngle, BoundInterval, Fraction, int]


def angle_enclosure(angle: AngleLike) -> BoundInterval:
    if isinstance(angle, PiAngle):
        return angle.radians()
    if isinstance(angle, BoundInterval):
        return angle
    return BoundInterval.point(angle)


@dataclass(frozen=True)
class ShapeMap:
    """The linear map (x, y) -> (x + alpha*y, beta*y)."""

    alpha: object
    beta: object

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not isinstance(v, BoundInterval):
                object.__setattr__(self, name, as_fraction(v))
        beta = self.beta
        if (beta.lo if isinstance(beta, BoundInterval) else beta) <= 0:
            raise DomainError("beta must be positive")

    def apply(self, p: Point2) -> Point2:
        return Point2(p.x + self.alpha * p.y, self.beta * p.y)

    def matrix(self):
        return [[Fraction(1), self.alpha], [Fraction(0), self.beta]]


def _iv(x) -> BoundInterval:
    return x if isinstance(x, BoundInterval) else BoundInterval.point(x)


def q_spectral_factors(m: ShapeMap, bits: int = 96) -> tuple[BoundInterval, BoundInterval]:
    """Enclosures of the smallest and largest eigenvalue of Q^t Q.

    The T^t T extremes that govern second derivatives are the squares of these.
    """
    alpha, beta = _iv(m.alpha), _iv(m.beta)
    a2 = alpha.square()
    b2 = beta.square()
    gamma = a2 + b2 + 1
    # gamma^2 - 4 beta^2 written as a sum of squares
    disc = (a2 + 1 - b2).square() + 4 * a2 * b2
    root = disc.sqrt(bits)
    lmax = (gamma + root) / 2
    lmin = 2 * b2 / (gamma + root)
    return lmin, lmax


def t_matrix(alpha, beta):
    """Matrix mapping the mapped Hessian entries back to the original ones."""
    a, b = as_fraction(alpha), as_fraction(beta)
    return [
        [Fraction(1), Fraction(0), Fraction(0), Fraction(0)],
        [a, b, Fraction(0), Fraction(0)],
        [a, Fraction(0), b, Fraction(0)],
        [a * a, a * b, a * b, b * b],
    ]


def arc_factors(theta: AngleLike, tau: AngleLike) -> tuple[BoundInterval, BoundInterval]:
    """Enclosures of rho = cos((theta+tau)/2)/cos(theta/2) and eta = sin((theta+tau)/2)/sin(theta/2)."""
    th = angle_enclosure(theta)
    ta = angle_enclosure(tau)
    pi = PI
    tt = th + ta
    if not (th.lo > 0 and th.hi < pi.lo and tt.lo > 0 and tt.hi < pi.lo):
        raise DomainError("arc perturbation needs 0 < theta < pi and 0 < theta + tau < pi")
    s0, c0 = sin_cos(th / 2)
    s1, c1 = sin_cos(tt / 2)
    return c1 / c0, s1 / s0


def theta_grid_c0() -> list[tuple[PiAngle, PiAngle]]:
    """The 60 arc nodes for the C0 sweep, refined geometrically towards pi/3."""
    thetas = []
    for i in range(1, 61):
        if i <= 48:
            f = Fraction(2, 100) * i
        elif i <= 59:
            f = Fraction(95, 100) + Fraction(5, 100) * (1 - Fraction(2) ** (48 - i))
        else:
            f = Fraction(1)
        thetas.append(PiAngle(f / 3))
    return _with_steps(thetas)


def theta_grid_gamma2() -> list[tuple[PiAngle, PiAngle]]:
    """The 98 arc nodes theta_i = 0.01 * i * pi/3 used on the lower arc."""
    return _with_steps([PiAngle(Fraction(i, 100) / 3) for i in range(1, 99)])


def _with_steps(thetas: list[PiAngle]) -> list[tuple[PiAngle, PiAngle]]:
    out = []
    prev = PiAngle(0)
    for th in thetas:
        out.append((th, th - prev))
        prev = th
    return out


def half_angle_tangent_upper(angle: PiAngle, bits: int = 48) -> Fraction:
    """A short rational t with t >= tan(angle/2)."""
    s, c = sin_cos(angle.radians() / 2)
    t_hi = s.hi / c.lo
    scale = 1 << bits
    return Fraction(-((-t_hi.numerator * scale) // t_hi.denominator), scale)


def circle_point(t) -> Point2:
    """Rational point on the unit circle at angle 2*atan(t)."""
    t = as_fraction(t)
    d = 1 + t * t
    return Point2((1 - t * t) / d, 2 * t / d)


# --------------------------------------------------------------------- meshes


@dataclass(frozen=True)
class Mesh:
    """Uniform red refinement of a parent triangle.

    ``element_edges[k][i]`` is ``(edge, sign)`` for the edge opposite local
    vertex ``i``; ``sign`` is +1 when the element's outward normal agrees with
    the global edge normal (tangent from lower to higher vertex index, rotated
    by +90 degrees).  ``sides`` lists the boundary edges of the parent sides
    OA, AB, BO in order along the side, with the sign of the parent outward
    normal.
    """

    parent: Triangle
    level: int
    vertices: tuple
    edges: tuple
    elements: tuple
    element_edges: tuple
    lattice: tuple
    sides: tuple
    corners: tuple
    _edge_index: dict = field(repr=False, compare=False, default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def h2(self) -> Fraction:
        """Squared diameter of every element."""
        return self.parent.diam2 / 4**self.level

    def edge_of(self, i: int, j: int) -> int:
        return self._edge_index[(min(i, j), max(i, j))]

    def element_triangle(self, k: int) -> Triangle:
        a, b, c = self.elements[k]
        return Triangle(self.vertices[a], self.vertices[b], self.vertices[c])

    def edge_midpoint_lattice(self, e: int) -> tuple[float, float]:
        i, j = self.edges[e]
        (a, b), (c, d) = self.lattice[i], self.lattice[j]
        return ((a + c) / 2, (b + d) / 2)


def refine_uniform(t: Triangle, level: int) -> Mesh:
    if level < 0:
        raise ValueError("level must be non-negative")
    if level > MAX_LEVEL:
        raise MemoryError(f"refinement level {level} exceeds the supported maximum {MAX_LEVEL}")
    n = 2**level
    index = {}
    vertices = []
    lattice = []
    da, db = t.a - t.o, t.b - t.o
    for j in range(n + 1):
        for i in range(n + 1 - j):
            index[(i, j)] = len(vertices)
            lattice.append((i, j))
            vertices.append(Point2(t.o.x + da.x * Fraction(i, n) + db.x * Fraction(j, n),
                                   t.o.y + da.y * Fraction(i, n) + db.y * Fraction(j, n)))
    elements = []
    for j in range(n):
        for i in range(n - j):
            elements.append((index[(i, j)], index[(i + 1, j)], index[(i, j + 1)]))
            if i + j <= n - 2:
                elements.append((index[(i + 1, j)], index[(i + 1, j + 1)], index[(i, j + 1)]))

    edge_index: dict = {}
    edges = []
    element_edges = []
    for el in elements:
        local = []
        for k in range(3):
            p, q = el[(k + 1) % 3], el[(k + 2) % 3]
            key = (min(p, q), max(p, q))
            if key not in edge_index:
                edge_index[key] = len(edges)
                edges.append(key)
            # local direction p->q is counterclockwise; outward normal is its -90 rotation
            sign = -1 if p < q else 1
            local.append((edge_index[key], sign))
        element_edges.append(tuple(local))

    def side(path):
        out = []
        for p, q in zip(path, path[1:]):
            e = edge_index[(min(p, q), max(p, q))]
            # traversal follows the parent's counterclockwise orientation
            out.append((e, -1 if p < q else 1))
        return tuple(out)

    oa = [index[(i, 0)] for i in range(n + 1)]
    ab = [index[(n - j, j)] for j in range(n + 1)]
    bo = [index[(0, n - j)] for j in range(n + 1)]
    return Mesh(
        parent=t,
        level=level,
        vertices=tuple(vertices),
        edges=tuple(edges),
        elements=tuple(elements),
        element_edges=tuple(element_edges),
        lattice=tuple(lattice),
        sides=(side(oa), side(ab), side(bo)),
        corners=(index[(0, 0)], index[(n, 0)], index[(0, n)]),
        _edge_index=edge_index,
    )
