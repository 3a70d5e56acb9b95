"""Lagrange and Fujino-Morley error constants on four reference triangles.

Each row pairs an L2-type and a gradient-type constant.  Vertices with
irrational coordinates are evaluated at a rational proxy within about 1e-15
and the bounds are carried over with Lemma 4.1 factors.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .constants import ConstantKind, ConstantResult, constant_bounds
from .interval import BoundInterval, decimal_str, sqrt_bounds

SLACK = Fraction(1, 10**6)


def _irr(q: Fraction, sign: int = 1):
    """Rational proxy and 96-bit enclosure of sign * sqrt(q)."""
    lo, hi = sqrt_bounds(q, 96)
    proxy = sqrt_bounds(q, 50)[0]
    if sign > 0:
        return proxy, BoundInterval(lo, hi)
    return -proxy, BoundInterval(-hi, -lo)


def _vertex(label: str):
    half = Fraction(1, 2)
    if label == "(0,1)":
        return (Fraction(0), Fraction(1)), None
    if label == "(0,0.1)":
        return (Fraction(0), Fraction(1, 10)), None
    if label == "(1/2,sqrt3/2)":
        p, iv = _irr(Fraction(3, 4))
        return (half, p), (BoundInterval.point(half), iv)
    if label == "(-sqrt2/2,sqrt2/2)":
        px, ivx = _irr(half, -1)
        py, ivy = _irr(half)
        return (px, py), (ivx, ivy)
    raise KeyError(label)


@dataclass(frozen=True)
class TableEntry:
    table: int
    vertex: str
    kind: ConstantKind
    printed: str  # value as printed
    underlined: str  # the underlined prefix
    level: int
    degree: int


def _rows():
    # (vertex, first printed, underlined, level, degree, second printed, underlined, level, degree)
    t1 = [
        ("(0,1)", "0.167349", "0.167", 4, 8, "0.488767", "0.4887", 6, 8),
        ("(1/2,sqrt3/2)", "0.117134", "0.117", 4, 8, "0.318457", "0.3184", 5, 8),
        ("(-sqrt2/2,sqrt2/2)", "0.245388", "0.245", 5, 8, "1.187998", "1.1879", 6, 8),
        ("(0,0.1)", "0.108221", "0.108", 4, 8, "0.327955", "0.327", 5, 8),
    ]
    t2 = [
        ("(0,1)", "0.090287", "0.090", 5, 8, "0.233708", "0.233", 5, 8),
        ("(1/2,sqrt3/2)", "0.073583", "0.073", 4, 8, "0.174354", "0.1743", 6, 8),
        ("(-sqrt2/2,sqrt2/2)", "0.093318", "0.093", 5, 8, "0.300773", "0.300", 5, 8),
        ("(0,0.1)", "0.060474", "0.060", 4, 8, "0.188918", "0.188", 6, 8),
    ]
    out = []
    for table, rows, kinds in ((1, t1, (ConstantKind.CL0, ConstantKind.CL1)),
                               (2, t2, (ConstantKind.CFM0, ConstantKind.CFM1))):
        for v, p0, u0, l0, d0, p1, u1, l1, d1 in rows:
            out.append(TableEntry(table, v, kinds[0], p0, u0, l0, d0))
            out.append(TableEntry(table, v, kinds[1], p1, u1, l1, d1))
    return out


TABLE_ENTRIES = _rows()


def _unit(prefix: str) -> Fraction:
    return Fraction(1, 10 ** len(prefix.split(".")[1]))


def agreement(bound: BoundInterval, entry: TableEntry) -> dict:
    """Compare an enclosure with the printed value.

    The printed value comes from a certified upper bound and the underline
    marks digits shared by both sides, so the check is: the enclosure lies in
    [P, P + u] (P the underlined prefix, u its last unit) up to SLACK, and
    the lower end does not exceed the printed value.
    """
    p = Fraction(entry.underlined)
    v = Fraction(entry.printed)
    u = _unit(entry.underlined)
    prefix_ok = p - SLACK <= bound.lo and bound.hi <= p + u + SLACK
    lower_ok = bound.lo <= v + SLACK
    return {
        "prefix_ok": prefix_ok,
        "lower_ok": lower_ok,
        "contains_printed": bound.contains(v),
        "agreeing_digits": common_digits(bound),
        "ok": prefix_ok and lower_ok,
    }


def common_digits(bound: BoundInterval, max_digits: int = 12) -> int:
    """Number of decimals on which the truncated ends of ``bound`` agree."""
    n = 0
    for d in range(1, max_digits + 1):
        if decimal_str(bound.lo, d, "down") != decimal_str(bound.hi, d, "down"):
            break
        n = d
    return n


def evaluate_entry(entry: TableEntry, level: int | None = None, degree: int | None = None,
                   rel_tol=Fraction(1, 10**8), mode: str = "certified") -> ConstantResult:
    b, target = _vertex(entry.vertex)
    return constant_bounds(b, entry.kind, level or entry.level, degree or entry.degree, rel_tol, mode,
                           target=target)


__all__ = ["TableEntry", "TABLE_ENTRIES", "agreement", "common_digits", "evaluate_entry", "SLACK"]
