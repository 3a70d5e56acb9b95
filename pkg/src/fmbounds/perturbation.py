"""Certified perturbation factors for moving the vertex B.

Every factor here multiplies a certified upper bound of a constant on one
triangle to give an upper bound on a perturbed triangle.  Two kinds of factor
are available: the closed-form envelopes stated with the theorems (Eqs. 17-18,
the shear polynomial, the arc ratios) and the exact spectral factors of
Q^t Q, evaluated in interval arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .geometry import (
    AngleLike,
    DomainError,
    PiAngle,
    ShapeMap,
    angle_enclosure,
    arc_factors,
    q_spectral_factors,
)
from .interval import PI, BoundInterval, as_fraction, sin_cos

Number = Union[int, Fraction, BoundInterval]


@dataclass(frozen=True)
class TrigEnclosure:
    angle: object
    sin: BoundInterval
    cos: BoundInterval


@dataclass(frozen=True)
class PerturbFactor:
    factor: BoundInterval
    rule: str
    domain: tuple = ()

    def apply(self, bound: BoundInterval) -> BoundInterval:
        return BoundInterval(bound.lo, (self.factor * bound.hi).hi)


def trig_enclosure(angle: AngleLike, tol=Fraction(1, 10**30)) -> TrigEnclosure:
    """sin and cos of a rational, an interval, or a symbolic multiple of pi."""
    tol = as_fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = angle_enclosure(angle)
    if x.width > tol / 4:
        # only the pi enclosure can make the argument this wide
        raise ValueError("angle enclosure is wider than the requested tolerance")
    s, c = sin_cos(x, tol / 4)
    if s.width > tol or c.width > tol:
        raise ValueError("tolerance unattainable")
    return TrigEnclosure(angle, s, c)


def _iv(x) -> BoundInterval:
    return x if isinstance(x, BoundInterval) else BoundInterval.point(x)


def _abs_max(x) -> Fraction:
    x = _iv(x)
    return max(abs(x.lo), abs(x.hi))


# ---------------------------------------------------------------- C0 on arcs


def c0_arc_factor(theta: AngleLike, tau: AngleLike) -> BoundInterval:
    """rho^2 (tau < 0) or eta^2 (tau > 0) of Theorem 4.5."""
    ta = angle_enclosure(tau)
    if ta.lo == 0 and ta.hi == 0:
        return BoundInterval.point(1)
    rho, eta = arc_factors(theta, tau)
    if ta.hi < 0:
        return rho.square()
    if ta.lo > 0:
        return eta.square()
    return rho.square().max(eta.square())


def c0_arc_bound(theta: AngleLike, tau: AngleLike, c0_at_theta: BoundInterval) -> BoundInterval:
    f = c0_arc_factor(theta, tau)
    return BoundInterval(0, (f * c0_at_theta.hi).hi)


def c0_segment_factor(t_prev, t_cur) -> Fraction:
    """Exact Theorem 4.5 factor on (theta_prev, theta_cur] with t = tan(theta/2).

    cos^2(phi/2) = 1/(1 + tan^2(phi/2)), so the worst ratio at the left end is
    rational when the nodes are given through rational half-angle tangents.
    """
    t_prev, t_cur = as_fraction(t_prev), as_fraction(t_cur)
    if not 0 <= t_prev < t_cur:
        raise DomainError("segment tangents must satisfy 0 <= t_prev < t_cur")
    return (1 + t_cur * t_cur) / (1 + t_prev * t_prev)


# ------------------------------------------------------------------ C_CR


def ccr_shear_factor(eps, form: str = "poly") -> BoundInterval:
    """Theorem 4.6 factor for B -> (a + b*eps, b).

    ``form="poly"`` is 1 + |eps|/2 + 3 eps^2/8; ``form="root"`` is the sharper
    sqrt(lambda_max(Q^t Q)) with alpha = eps, beta = 1.
    """
    m = _abs_max(eps)
    if m >= Fraction(1, 2):
        raise DomainError("Theorem 4.6 needs |eps| < 1/2")
    if form == "poly":
        return BoundInterval.point(1 + m / 2 + 3 * m * m / 8)
    e2 = BoundInterval.point(m * m)
    inner = (e2.square() + 4 * e2).sqrt()
    return ((e2 + 2 + inner) / 2).sqrt()


def ccr_shear_bound(eps, ccr: BoundInterval, form: str = "poly") -> BoundInterval:
    f = ccr_shear_factor(eps, form)
    return BoundInterval(0, (f * ccr.hi).hi)


def ccr_arc_factor(theta: AngleLike, tau: AngleLike) -> BoundInterval:
    """sqrt(lambda_max(Q^t Q)) for the arc map: rho (tau < 0) or eta (tau > 0).

    From Lemma 4.3 ||u||^2 = ||u~||^2 / beta and ||grad u|| <= rho/sqrt(beta)
    ||grad u~||, so C_CR grows by at most rho.
    """
    ta = angle_enclosure(tau)
    if ta.lo == 0 and ta.hi == 0:
        return BoundInterval.point(1)
    rho, eta = arc_factors(theta, tau)
    if ta.hi < 0:
        return rho
    if ta.lo > 0:
        return eta
    return rho.max(eta)


def ccr_arc_ratio_factor(theta: AngleLike, tau: AngleLike) -> BoundInterval:
    """The cruder max(rho, eta)/min(rho, eta) ratio (kept for comparison)."""
    rho, eta = arc_factors(theta, tau)
    return rho.max(eta) / rho.min(eta)


def ccr_arc_bound(theta: AngleLike, tau: AngleLike, ccr: BoundInterval) -> BoundInterval:
    f = ccr_arc_factor(theta, tau)
    return BoundInterval(0, (f * ccr.hi).hi)


def ccr_segment_factor(t_prev, t_cur) -> BoundInterval:
    """Square root of :func:`c0_segment_factor`, enclosed."""
    return BoundInterval.point(c0_segment_factor(t_prev, t_cur)).sqrt()


# ------------------------------------------------------------------ C1


def c1_general_factor(alpha, eps) -> Fraction:
    """Eq. (17) for eps >= 0, Eq. (18) for eps <= 0; both branches if eps straddles 0."""
    a = _abs_max(alpha)
    e_iv = _iv(eps)
    e = _abs_max(eps)
    if a > Fraction(1, 2) or e > Fraction(1, 2):
        raise DomainError("Theorem 4.7 needs |alpha|, |eps| <= 1/2")
    pos = 1 + Fraction(3, 2) * a + 2 * e + Fraction(3, 2) * a * a + e * e
    neg = 1 + Fraction(3, 2) * a + e + Fraction(3, 2) * a * a + 2 * e * e
    if e_iv.lo >= 0:
        return pos
    if e_iv.hi <= 0:
        return neg
    return max(pos, neg)


def c1_general_bound(alpha, eps, c1: BoundInterval) -> BoundInterval:
    return BoundInterval(0, c1_general_factor(alpha, eps) * c1.hi)


# --------------------------------------------------- Lemma 4.1 factors


def spectral_factor(kind_type: str, m: ShapeMap) -> BoundInterval:
    """Factor by which a constant can grow from K to Q(K), from Lemma 4.1.

    ``kind_type`` is "L2" (D^2 over L^2: lambda_max), "GRAD" (D^2 over grad:
    lambda_max / sqrt(lambda_min)) or "CR" (grad over L^2: sqrt(lambda_max)).
    The map's alpha and beta may be intervals; the result then covers the box.
    """
    lmin, lmax = q_spectral_factors(m)
    if kind_type == "L2":
        return lmax
    if kind_type == "GRAD":
        return lmax / lmin.sqrt()
    if kind_type == "CR":
        return lmax.sqrt()
    raise ValueError(f"unknown factor type {kind_type!r}")


def map_between(src, dst) -> ShapeMap:
    """ShapeMap carrying O, A=(1,0), B=src to O, A, B=dst (coordinates may be intervals)."""
    (a, b), (x, y) = src, dst
    b = _iv(b)
    # x = a + alpha*b, y = beta*b
    return ShapeMap((_iv(x) - _iv(a)) / b, _iv(y) / b)


# -------------------------------------------------------- bookkeeping


@dataclass(frozen=True)
class CandidateSet:
    description: str
    pieces: tuple


def c0_y_monotone_reduce(region: str) -> CandidateSet:
    """Boundary pieces on which a y-monotone constant attains its supremum."""
    r = region.strip().lower()
    if r in ("omega", "c0"):
        return CandidateSet("arc r=1, 0 < theta <= pi/3", (("arc", PiAngle(0), PiAngle(Fraction(1, 3))),))
    if r in ("omega2", "ccr"):
        return CandidateSet(
            "Gamma1 u Gamma2",
            (("segment", "y = sin(0.98 pi/3), 1/2 <= x <= cos(0.98 pi/3)"),
             ("arc", PiAngle(0), PiAngle(Fraction(98, 300)))),
        )
    if r in ("", "empty", "none"):
        return CandidateSet("empty", ())
    raise ValueError(f"unknown region {region!r}")


__all__ = [
    "TrigEnclosure",
    "PerturbFactor",
    "trig_enclosure",
    "c0_arc_factor",
    "c0_arc_bound",
    "c0_segment_factor",
    "ccr_shear_factor",
    "ccr_shear_bound",
    "ccr_arc_factor",
    "ccr_arc_bound",
    "ccr_segment_factor",
    "c1_general_factor",
    "c1_general_bound",
    "spectral_factor",
    "map_between",
    "c0_y_monotone_reduce",
    "PI",
]
