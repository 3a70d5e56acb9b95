"""Two-sided bounds of the interpolation error constants on one triangle.

Upper bounds come from the nonconforming discrete eigenvalue and the lower
bound lambda >= lambda_h / (1 + lambda_h C_h^2); lower bounds come from Ritz
values on conforming polynomial spaces.  The Fujino-Morley constants CFM0 and
CFM1 coincide with C0 and C1: for e = v - Pi v the edge integrals of grad e
vanish, so int_K D^2 e = 0, e is D^2-orthogonal to P^2 and lies in the FM
kernel.  The discrete counterpart of this identity is checked exactly on every
mesh that is used.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import mpmath
import numpy as np

from .assembly import (
    FormPair,
    assemble,
    conforming_poly_space,
    constrained_space,
    reduce_pair,
    u0_matches_fm_kernel,
)
from .eigencert import EigenEnclosure, eig_enclose, smallest_eig_approx
from .geometry import Mesh, ShapeMap, Triangle, canonical_triangle, refine_uniform
from .interval import BoundInterval, as_fraction, sqrt_bounds
from .perturbation import map_between, spectral_factor

log = logging.getLogger(__name__)

APRIORI = {"L2": Fraction(2575, 10000), "GRAD": Fraction(1893, 10000)}
# the global values certified in the paper, usable once re-proved by a sweep
BOOTSTRAP = {"L2": Fraction(7353, 100000), "GRAD": Fraction(18868, 100000)}


class SoundnessError(RuntimeError):
    """Raised when a certified lower bound exceeds a certified upper bound."""


class ConstantKind(Enum):
    C0 = "c0"
    C1 = "c1"
    CCR = "ccr"
    CL0 = "cl0"
    CL1 = "cl1"
    CFM0 = "cfm0"
    CFM1 = "cfm1"

    @classmethod
    def parse(cls, text) -> "ConstantKind":
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise ValueError(f"unknown constant kind {text!r}") from None

    @property
    def element(self) -> str:
        return "CR" if self is ConstantKind.CCR else "FM"

    @property
    def space(self) -> str:
        if self is ConstantKind.CCR:
            return "CR_kernel"
        if self in (ConstantKind.CL0, ConstantKind.CL1):
            return "Lagrange_zero"
        return "FM_kernel"

    @property
    def forms(self) -> tuple[str, str]:
        if self is ConstantKind.CCR:
            return "GRAD", "L2"
        return "D2", ("L2" if self.norm_type == "L2" else "GRAD")

    @property
    def norm_type(self) -> str:
        """"L2" when the constant scales like h^2, "GRAD" when it scales like h."""
        if self in (ConstantKind.C0, ConstantKind.CL0, ConstantKind.CFM0):
            return "L2"
        return "GRAD"

    @property
    def factor_type(self) -> str:
        return "CR" if self is ConstantKind.CCR else self.norm_type

    @property
    def exponent(self) -> int:
        return 2 if self.norm_type == "L2" else 1


@dataclass
class UpperResult:
    hi: Fraction
    certified: bool
    lambda_h: BoundInterval
    lambda_lower: Fraction
    ch2: Fraction
    discrete_hi: Fraction  # 1/sqrt(lambda_h.lo), before the C_h correction
    dim: int
    note: str = ""


@dataclass
class ConstantResult:
    triangle: Triangle
    kind: ConstantKind
    bound: BoundInterval
    level: int
    degree: int | None
    certified: bool
    upper: UpperResult | None = None
    wall_time: float = 0.0
    notes: list = field(default_factory=list)


# ------------------------------------------------------------------ pencils


def build_pencil(t: Triangle, kind, level: int, mesh: Mesh | None = None) -> FormPair:
    kind = ConstantKind.parse(kind)
    if level < 1 and kind.space != "Lagrange_zero":
        raise ValueError("the kernel spaces are trivial at level 0; use level >= 1")
    mesh = refine_uniform(t, level) if mesh is None else mesh
    space = constrained_space(mesh, kind.space)
    mform, nform = kind.forms
    m = assemble(mesh, kind.element, mform)
    if kind in (ConstantKind.CFM0, ConstantKind.CFM1):
        if not u0_matches_fm_kernel(mesh, m, space):
            raise SoundnessError("discrete U0 space differs from the FM kernel")
    n = assemble(mesh, kind.element, nform)
    return reduce_pair(m, n, space, f"{kind.value}-L{level}")


def projection_constant_sq(t: Triangle, kind, level: int, bootstrap: bool = False) -> Fraction:
    """C_h^2 of Theorem 3.1 on the red-refined mesh (exact rational)."""
    kind = ConstantKind.parse(kind)
    h2 = t.diam2 / 4**level
    if kind is ConstantKind.CCR:
        c = APRIORI["GRAD"]
        return c * c * h2
    c = (BOOTSTRAP if bootstrap else APRIORI)[kind.norm_type]
    if kind.norm_type == "L2":
        return c * c * h2 * h2
    return c * c * h2


def lower_eigen_bound(lam_h: Fraction, ch2: Fraction) -> Fraction:
    """Eq. (14): lambda >= lambda_h / (1 + lambda_h C_h^2)."""
    lam_h = as_fraction(lam_h)
    if lam_h <= 0:
        return Fraction(0)
    return lam_h / (1 + lam_h * ch2)


def inv_sqrt_upper(x: Fraction, bits: int = 96) -> Fraction:
    return sqrt_bounds(1 / as_fraction(x), bits)[1]


def inv_sqrt_lower(x: Fraction, bits: int = 96) -> Fraction:
    return sqrt_bounds(1 / as_fraction(x), bits)[0]


# ------------------------------------------------------------- upper side


def constant_upper(t: Triangle, kind, level: int, rel_tol=Fraction(1, 10**7), mode: str = "certified",
                   bootstrap: bool = False) -> UpperResult:
    kind = ConstantKind.parse(kind)
    pair = build_pencil(t, kind, level)
    ch2 = projection_constant_sq(t, kind, level, bootstrap)
    if mode == "approx":
        lam, _ = smallest_eig_approx(pair)
        lam_q = Fraction(lam)
        lam_low = lower_eigen_bound(lam_q, ch2)
        return UpperResult(inv_sqrt_upper(lam_low), False, BoundInterval.point(lam_q), lam_low, ch2,
                           inv_sqrt_upper(lam_q), pair.dim, "approximate")
    enc: EigenEnclosure = eig_enclose(pair, rel_tol)
    lam_lo = enc.value.lo
    if lam_lo <= 0:
        return UpperResult(Fraction(10**9), False, enc.value, Fraction(0), ch2, Fraction(10**9), pair.dim,
                           "no positive certified eigenvalue bound")
    lam_low = lower_eigen_bound(lam_lo, ch2)
    return UpperResult(inv_sqrt_upper(lam_low), True, enc.value, lam_low, ch2,
                       inv_sqrt_upper(lam_lo), pair.dim, enc.note)


# ------------------------------------------------------------- lower side


def _ritz_vector(pair: FormPair, dps: int = 50) -> list[Fraction]:
    with mpmath.workdps(dps):
        a = mpmath.matrix(pair.m.to_dense())
        b = mpmath.matrix(pair.n.to_dense())
        chol = mpmath.cholesky(b)
        inv = mpmath.inverse(chol)
        c = inv * a * inv.T
        c = (c + c.T) / 2
        w, q = mpmath.eigsy(c)
        k = min(range(len(w)), key=lambda i: w[i])
        y = inv.T * q[:, k]
        scale = max(abs(y[i]) for i in range(len(y)))
        out = []
        for i in range(len(y)):
            v = y[i] / scale
            out.append(Fraction(int(mpmath.nint(v * mpmath.mpf(2) ** 100)), 2**100))
    return out


def rayleigh_upper(pair: FormPair, v: list[Fraction]) -> Fraction:
    return pair.m.quad(v) / pair.n.quad(v)


def constant_lower(t: Triangle, kind, degree: int) -> Fraction:
    """Certified lower bound of the constant from a conforming Ritz value."""
    kind = ConstantKind.parse(kind)
    if kind.space == "FM_kernel" and degree < 3:
        raise ValueError("degree >= 3 is needed for the FM kernel (W^2 is trivial)")
    ps = conforming_poly_space(t, degree, kind.space, kind.forms[1])
    v = _ritz_vector(ps.pair)
    return inv_sqrt_lower(rayleigh_upper(ps.pair, v))


# ----------------------------------------------------- proxies and transfer


def transfer_factor(kind, proxy: tuple, target: tuple) -> BoundInterval:
    """Factor f with C(target) <= f C(proxy) and C(proxy) <= f' C(target).

    ``target`` coordinates may be BoundIntervals enclosing an irrational point;
    the returned interval's hi bounds the growth from proxy to target, and the
    growth back is obtained by calling with the arguments swapped.
    """
    kind = ConstantKind.parse(kind)
    return spectral_factor(kind.factor_type, map_between(proxy, target))


def _iv(x) -> BoundInterval:
    return x if isinstance(x, BoundInterval) else BoundInterval.point(x)


def constant_bounds(t_or_b, kind, level: int, degree: int | None, rel_tol=Fraction(1, 10**7),
                    mode: str = "certified", bootstrap: bool = False, target=None) -> ConstantResult:
    """Two-sided bound of ``kind`` on a triangle.

    ``t_or_b`` is a Triangle or the vertex B of the canonical triangle.  When
    ``target`` (an enclosure of an irrational vertex B) is given, both sides are
    transferred from the rational proxy to the target with Lemma 4.1 factors.
    """
    start = time.perf_counter()
    kind = ConstantKind.parse(kind)
    t = t_or_b if isinstance(t_or_b, Triangle) else canonical_triangle(*t_or_b)
    notes = []
    up = constant_upper(t, kind, level, rel_tol, mode, bootstrap)
    hi = up.hi
    lo = Fraction(0)
    if degree is not None:
        lo = constant_lower(t, kind, degree)
    if target is not None:
        proxy = (t.b.x, t.b.y)
        grow = transfer_factor(kind, proxy, target).hi
        shrink = transfer_factor(kind, target, proxy).hi
        hi = hi * grow
        lo = lo / shrink
        notes.append(f"transferred from proxy B={proxy[0]},{proxy[1]} (factors {float(grow):.3g}, {float(shrink):.3g})")
    if lo > hi:
        if up.certified:
            raise SoundnessError(f"{kind.value}: lower bound {float(lo)} exceeds upper bound {float(hi)}")
        notes.append("approximate upper bound is below the certified lower bound")
        hi = lo
    res = ConstantResult(t, kind, BoundInterval(lo, hi), level, degree, up.certified, up,
                         time.perf_counter() - start, notes)
    return res


# ------------------------------------------------------------------ scaling


@dataclass
class ScalingReport:
    exponent: int
    matrices_scale_exactly: bool
    eigen_ratio: Fraction  # lambda(s t) / lambda(t) implied by the exact matrix relation
    bound_ratio_exact: bool


def scaling_check(t: Triangle, s, kind, level: int = 2) -> ScalingReport:
    """Check C(sK) = s^k C(K) through the discrete pencils at a fixed level.

    FM and CR degrees of freedom are invariant under scaling, so the pencil on
    sK must equal (s^-p M, s^q N) entrywise; then every eigenvalue scales by
    s^-(p+q) and the constant by s^((p+q)/2).
    """
    kind = ConstantKind.parse(kind)
    s = as_fraction(s)
    if s <= 0:
        raise ValueError("s must be positive")
    p0 = build_pencil(t, kind, level)
    p1 = build_pencil(t.scaled(s), kind, level)
    power = {"D2": -2, "GRAD": 0, "L2": 2}
    mform, nform = kind.forms
    ok = p1.m == p0.m.scaled(s ** power[mform]) and p1.n == p0.n.scaled(s ** power[nform])
    eig_ratio = s ** (power[mform] - power[nform])
    exponent = (power[nform] - power[mform]) // 2
    # the Theorem 3.1 bound also scales exactly: C_h^2 picks up s^(2*exponent)
    ch_ok = (projection_constant_sq(t.scaled(s), kind, level)
             == projection_constant_sq(t, kind, level) * s ** (2 * exponent))
    return ScalingReport(exponent, ok, eig_ratio, ch_ok)
