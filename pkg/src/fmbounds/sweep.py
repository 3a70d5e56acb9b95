"""Certified suprema of C0 and C1 over all triangle shapes.

Shapes are normalised to O=(0,0), A=(1,0), B=(x,y) with B in
Omega = {x >= 1/2, y > 0, x^2 + y^2 <= 1}.  Both sweeps reduce Omega to
boundary pieces on which a y-monotone constant peaks, evaluate certified
upper bounds at rational sample vertices, and cover each piece by
perturbation factors.  Parameters are rational so that tiling can be checked
with exact equality.

C0 sweep: the arc is parametrised by t = tan(theta/2) and sampled at the
rational points circle_point(t_i), which lie exactly on the unit circle.

C1 sweep: with t* >= tan(0.98 pi/6) and B* = circle_point(t*) = (x*, y*),
y* >= y0 = sin(0.98 pi/3).
  Omega1 = {y >= y0}: one C1 evaluation near the equilateral vertex plus a
           box factor.
  Omega2 = {y <= y*}: C1 <= C_CR there (Lemma 2.1), and C_CR grows with y, so
           its sup lies on Gamma1 = {y = y*, 1/2 <= x <= x*} or on Gamma2,
           the arc with 0 < t <= t*.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .constants import ConstantKind, constant_lower, constant_upper
from .geometry import (
    PiAngle,
    ShapeMap,
    canonical_triangle,
    circle_point,
    half_angle_tangent_upper,
    theta_grid_c0,
    theta_grid_gamma2,
)
from .interval import BoundInterval, as_fraction, sin_cos, sqrt_bounds
from .perturbation import (
    PerturbFactor,
    c0_segment_factor,
    c1_general_factor,
    ccr_segment_factor,
    ccr_shear_factor,
    spectral_factor,
)

log = logging.getLogger(__name__)

# published certified lower bounds; a certified sup below them means a bug
LOWER_WITNESS = {"c0": Fraction(73499, 10**6), "c1": Fraction(188638, 10**6)}
GAMMA_ANGLE = PiAngle(Fraction(98, 300))  # 0.98 * pi/3


class CoverageError(RuntimeError):
    """The segments of a sweep do not tile their declared domain."""


@dataclass
class Segment:
    part: str
    interval: tuple  # (lo, hi] in the part's parameter
    sample: tuple  # rational vertex B
    point: BoundInterval
    factor: PerturbFactor
    covered: BoundInterval
    certified: bool


@dataclass
class CoverageReport:
    constant: ConstantKind
    segments: list
    global_sup: BoundInterval
    complete: bool
    domains: dict = field(default_factory=dict)  # part -> (lo, hi)
    level: int = 0
    notes: list = field(default_factory=list)

    def part(self, name: str) -> list:
        return [s for s in self.segments if s.part == name]

    def part_sup(self, name: str) -> Fraction:
        return max(s.covered.hi for s in self.part(name))


def check_tiling(intervals, domain) -> None:
    """Raise CoverageError unless consecutive intervals tile ``domain`` exactly."""
    if not intervals:
        raise CoverageError("no segments")
    lo, hi = domain
    cur = lo
    for k, (a, b) in enumerate(intervals):
        if a != cur:
            raise CoverageError(f"segment {k} starts at {a}, expected {cur}")
        if not b > a:
            raise CoverageError(f"segment {k} is empty")
        cur = b
    if cur != hi:
        raise CoverageError(f"segments end at {cur}, domain ends at {hi}")


def verify_report(report: CoverageReport) -> None:
    for name, dom in report.domains.items():
        check_tiling([s.interval for s in report.part(name)], dom)
    top = max(s.covered.hi for s in report.segments)
    if report.global_sup.hi != top:
        raise CoverageError("global sup does not match the segments")


def _refine(nodes: list, mult: int) -> list:
    # insert mult-1 equally spaced nodes in every gap
    if mult < 1:
        raise ValueError("grid multiplier must be >= 1")
    out = [nodes[0]]
    for a, b in zip(nodes, nodes[1:]):
        out.extend(a + (b - a) * Fraction(k, mult) for k in range(1, mult + 1))
    return out


def _evaluate(job):
    bx, by, kind, level, rel_tol, mode = job
    r = constant_upper(canonical_triangle(bx, by), kind, level, rel_tol, mode)
    return r.hi, r.certified


def _run(jobs: list, workers: int) -> list:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_evaluate, jobs))
    return [_evaluate(j) for j in jobs]


def _fold(kind, segments, domains, level, notes, witness_lo=Fraction(0)) -> CoverageReport:
    hi = max(s.covered.hi for s in segments)
    complete = all(s.certified for s in segments)
    report = CoverageReport(kind, segments, BoundInterval(min(witness_lo, hi), hi), complete,
                            domains, level, notes)
    verify_report(report)
    floor = LOWER_WITNESS.get(kind.value)
    if complete and floor is not None and hi < floor:
        notes.append(f"certified sup {float(hi)} is below the published lower bound {float(floor)}")
        report.complete = False
    return report


# --------------------------------------------------------------------- C0


def c0_nodes(mult: int = 1) -> list[Fraction]:
    """Half-angle tangents 0 = t_0 < t_1 < ... with t_i >= tan(theta_i/2)."""
    ts = [Fraction(0)] + [half_angle_tangent_upper(th) for th, _ in theta_grid_c0()]
    ts = _refine(ts, mult)
    # the last node must reach theta = pi/3, i.e. t^2 >= 1/3
    if 3 * ts[-1] ** 2 < 1:
        raise CoverageError("C0 grid does not reach pi/3")
    return ts


def optimize_c0(level: int = 5, rel_tol=Fraction(1, 10**7), mode: str = "certified",
                grid_mult: int = 1, workers: int = 1, witness_degree: int | None = 7) -> CoverageReport:
    kind = ConstantKind.C0
    ts = c0_nodes(grid_mult)
    pts = [circle_point(t) for t in ts[1:]]
    vals = _run([(p.x, p.y, kind, level, rel_tol, mode) for p in pts], workers)
    segs = []
    for k, (p, (hi, cert)) in enumerate(zip(pts, vals)):
        f = c0_segment_factor(ts[k], ts[k + 1])
        fac = PerturbFactor(BoundInterval.point(f), "arc rho^2", (ts[k], ts[k + 1]))
        point = BoundInterval(0, hi)
        segs.append(Segment("arc", (ts[k], ts[k + 1]), (p.x, p.y), point, fac, fac.apply(point), cert))
    notes = [f"arc parameter t = tan(theta/2) on (0, {ts[-1]}]"]
    lo = Fraction(0)
    if witness_degree:
        lo = constant_lower(canonical_triangle(Fraction(1, 2), _sqrt3_half_lo()), kind, witness_degree)
        notes.append(f"lower witness: degree {witness_degree} Ritz value near the equilateral triangle")
    return _fold(kind, segs, {"arc": (Fraction(0), ts[-1])}, level, notes, lo)


def _sqrt3_half_lo() -> Fraction:
    return sqrt_bounds(Fraction(3, 4), 64)[0]


# --------------------------------------------------------------------- C1


@dataclass(frozen=True)
class C1Geometry:
    t_star: Fraction
    x_star: Fraction
    y_star: Fraction
    y0: BoundInterval  # sin(0.98 pi/3)
    x0: BoundInterval  # cos(0.98 pi/3)
    b_base: Fraction  # rational y of the Omega1 base vertex, >= sqrt(3)/2


def c1_geometry() -> C1Geometry:
    t_star = half_angle_tangent_upper(GAMMA_ANGLE)
    p = circle_point(t_star)
    s, c = sin_cos(GAMMA_ANGLE.radians())
    b_base = sqrt_bounds(Fraction(3, 4), 64)[1]
    g = C1Geometry(t_star, p.x, p.y, s, c, b_base)
    if not g.y0.hi <= g.y_star:
        raise CoverageError("Gamma1 line lies below sin(0.98 pi/3)")
    return g


def omega1_map_box(g: C1Geometry) -> ShapeMap:
    """All maps from the base vertex (1/2, b) onto Omega1 = {y >= y0}."""
    b = g.b_base
    alpha = BoundInterval(0, (g.x0.hi - Fraction(1, 2)) / b)
    beta = BoundInterval(g.y0.lo / b, 1)
    return ShapeMap(alpha, beta)


def omega1_factor(g: C1Geometry) -> PerturbFactor:
    box = omega1_map_box(g)
    eps = box.beta - 1
    closed = c1_general_factor(box.alpha, eps)
    spec = spectral_factor("GRAD", box)
    f = BoundInterval.point(closed).max(spec)
    return PerturbFactor(f, "max(Eq. 18, Lemma 4.1 box)", (box.alpha, eps))


def gamma1_nodes(g: C1Geometry, n: int) -> list[Fraction]:
    half = Fraction(1, 2)
    return [half + (g.x_star - half) * Fraction(k, n) for k in range(n + 1)]


def gamma2_nodes(g: C1Geometry, mult: int = 1) -> list[Fraction]:
    ts = [half_angle_tangent_upper(th) for th, _ in theta_grid_gamma2()]
    ts[-1] = g.t_star
    return _refine([Fraction(0)] + ts, mult)


def optimize_c1(level: int = 5, rel_tol=Fraction(1, 10**7), mode: str = "certified",
                grid_mult: int = 1, workers: int = 1, gamma1_intervals: int = 20,
                witness_degree: int | None = 6) -> CoverageReport:
    g = c1_geometry()
    xs = gamma1_nodes(g, gamma1_intervals * grid_mult)
    ts = gamma2_nodes(g, grid_mult)
    arc_pts = [circle_point(t) for t in ts[1:]]
    line_pts = [((a + b) / 2, g.y_star) for a, b in zip(xs, xs[1:])]

    jobs = [(Fraction(1, 2), g.b_base, ConstantKind.C1, level, rel_tol, mode)]
    jobs += [(x, y, ConstantKind.CCR, level, rel_tol, mode) for x, y in line_pts]
    jobs += [(p.x, p.y, ConstantKind.CCR, level, rel_tol, mode) for p in arc_pts]
    vals = _run(jobs, workers)

    segs = []
    hi, cert = vals[0]
    fac = omega1_factor(g)
    point = BoundInterval(0, hi)
    segs.append(Segment("omega1", (g.y0.lo, g.b_base), (Fraction(1, 2), g.b_base), point, fac,
                        fac.apply(point), cert))
    for k, ((x, y), (hi, cert)) in enumerate(zip(line_pts, vals[1:1 + len(line_pts)])):
        eps = (xs[k + 1] - xs[k]) / 2 / y
        fac = PerturbFactor(ccr_shear_factor(eps), "shear 1+|e|/2+3e^2/8", (-eps, eps))
        point = BoundInterval(0, hi)
        segs.append(Segment("gamma1", (xs[k], xs[k + 1]), (x, y), point, fac, fac.apply(point), cert))
    for k, (p, (hi, cert)) in enumerate(zip(arc_pts, vals[1 + len(line_pts):])):
        fac = PerturbFactor(ccr_segment_factor(ts[k], ts[k + 1]), "arc rho", (ts[k], ts[k + 1]))
        point = BoundInterval(0, hi)
        segs.append(Segment("gamma2", (ts[k], ts[k + 1]), (p.x, p.y), point, fac, fac.apply(point), cert))

    # Omega1 is {y >= y0.lo}; Omega2 is {y <= y_star}: they overlap, so no gap
    if not g.y0.lo <= g.y_star:
        raise CoverageError("Omega1 and Omega2 leave a gap")
    notes = [
        f"Omega1 = {{y >= {float(g.y0.lo):.12f}}} from B=(1/2, {float(g.b_base):.12f})",
        f"Gamma1: y = {g.y_star}, 1/2 <= x <= {g.x_star}",
        f"Gamma2: t = tan(theta/2) on (0, {g.t_star}]",
        "C1 <= C_CR on Omega2; C_CR is non-decreasing in y",
    ]
    lo = Fraction(0)
    if witness_degree:
        w = circle_point(Fraction(1, 200))  # theta ~ 0.01, exactly on the unit circle
        lo = constant_lower(canonical_triangle(w.x, w.y), ConstantKind.C1, witness_degree)
        notes.append(f"lower witness: degree {witness_degree} Ritz value at B = circle_point(1/200)")
    domains = {
        "omega1": (g.y0.lo, g.b_base),
        "gamma1": (Fraction(1, 2), g.x_star),
        "gamma2": (Fraction(0), g.t_star),
    }
    return _fold(ConstantKind.C1, segs, domains, level, notes, lo)


# ---------------------------------------------------------------- contours


def in_omega(a, b) -> bool:
    a, b = as_fraction(a), as_fraction(b)
    return a >= Fraction(1, 2) and b > 0 and a * a + b * b <= 1


def contour_grid(kind, nx: int, ny: int, level: int = 3, workers: int = 1):
    """Approximate constants on an nx x ny grid over [1/2, 1] x (0, 1].

    Returns a list of rows (a, b, value) in row-major order (b outer); value is
    None outside Omega.  Values are floating point and not certified.
    """
    kind = ConstantKind.parse(kind)
    if nx < 1 or ny < 1:
        raise ValueError("grid must be at least 1 x 1")
    a_vals = [Fraction(1, 2) + Fraction(k, 2 * (nx - 1)) if nx > 1 else Fraction(1, 2) for k in range(nx)]
    b_vals = [Fraction(k + 1, ny) for k in range(ny)]
    pts = [(a, b) for b in b_vals for a in a_vals]
    inside = [in_omega(a, b) for a, b in pts]
    jobs = [(a, b, kind, level, None, "approx") for (a, b), ok in zip(pts, inside) if ok]
    vals = iter(_run(jobs, workers))
    out = []
    for (a, b), ok in zip(pts, inside):
        out.append((a, b, float(next(vals)[0]) if ok else None))
    return out


def asymptotic_reference() -> BoundInterval:
    """Literature value 1/sqrt(j_{0,1}^2 ...) = 0.1886407440; not certified here."""
    return BoundInterval(Fraction(18864074, 10**8), Fraction(18864075, 10**8))


__all__ = [
    "CoverageError",
    "CoverageReport",
    "Segment",
    "check_tiling",
    "verify_report",
    "c0_nodes",
    "optimize_c0",
    "c1_geometry",
    "omega1_factor",
    "gamma1_nodes",
    "gamma2_nodes",
    "optimize_c1",
    "in_omega",
    "contour_grid",
    "asymptotic_reference",
    "LOWER_WITNESS",
]
