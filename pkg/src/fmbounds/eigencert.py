"""Certified bounds for the smallest eigenvalue of a symmetric pencil (M, N).

A lower bound lam_bar < lambda_min is proved by showing that M - lam_bar*N is
positive definite (Sylvester's law of inertia).  Small pencils are factored in
exact rational arithmetic.  Larger ones use a fixed-point integer LDL^T whose
rounding errors are pushed onto the diagonal (see ``_fixed_point_spd``); a
``True`` from either path is a proof.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import FormPair
from .interval import BoundInterval, as_fraction, ceil_div, floor_div
from .sparse import RationalMatrix

log = logging.getLogger(__name__)

EXACT_DIM = 60  # pencils up to this size are factored in exact rationals
DENSE_APPROX_DIM = 600


class CertificationError(RuntimeError):
    pass


@dataclass
class EigenEnclosure:
    value: BoundInterval
    vector: np.ndarray | None = field(repr=False, default=None)
    certified: bool = True
    iterations: int = 0
    note: str = ""


# --------------------------------------------------------------- approximate


def smallest_eig_approx(pencil: FormPair) -> tuple[float, np.ndarray]:
    """Floating-point smallest generalized eigenpair (advisory only)."""
    n = pencil.dim
    if n == 0:
        raise ValueError("empty pencil")
    if n <= DENSE_APPROX_DIM:
        a = pencil.m.to_numpy()
        b = pencil.n.to_numpy()
        try:
            w, v = sla.eigh(a, b, subset_by_index=[0, 0])
        except np.linalg.LinAlgError as exc:
            raise ArithmeticError("N is not numerically positive definite") from exc
        return float(w[0]), v[:, 0]
    a = pencil.m.to_scipy().tocsc()
    b = pencil.n.to_scipy().tocsc()
    w, v = spla.eigsh(a, k=1, M=b, sigma=0, which="LM", tol=1e-14)
    return float(w[0]), v[:, 0]


# ------------------------------------------------------------------- exact


def _shifted(pencil: FormPair, lam) -> RationalMatrix:
    lam = as_fraction(lam)
    out = dict(pencil.m.data)
    for k, v in pencil.n.data.items():
        s = out.get(k, 0) - lam * v
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return RationalMatrix(pencil.m.shape, out)


def _adjacency(a: RationalMatrix):
    n = a.shape[0]
    diag = [Fraction(0)] * n
    adj = [dict() for _ in range(n)]
    for (i, j), v in a.data.items():
        if i == j:
            diag[i] = v
        else:
            adj[i][j] = v
    return diag, adj


def exact_ldl_positive(a: RationalMatrix, order=None) -> bool:
    """Exact sparse LDL^T; True iff every pivot is positive."""
    diag, adj = _adjacency(a)
    n = len(diag)
    order = range(n) if order is None else order
    for k in order:
        d = diag[k]
        if d <= 0:
            return False
        col = adj[k]
        items = list(col.items())
        for i, gi in items:
            row = adj[i]
            del row[k]
            f = gi / d
            for j, gj in items:
                if j == i:
                    diag[i] -= f * gi
                else:
                    s = row.get(j, 0) - f * gj
                    if s:
                        row[j] = s
                    else:
                        row.pop(j, None)
        adj[k] = {}
    return True


def inertia(a) -> tuple[int, int, int]:
    """Exact (n_pos, n_neg, n_zero) of a small symmetric rational matrix.

    Uses 1x1 pivots while a non-zero diagonal entry remains and a 2x2 pivot
    [[0, x], [x, 0]] (one positive, one negative eigenvalue) otherwise.
    """
    if isinstance(a, RationalMatrix):
        a = a.to_dense()
    m = [[Fraction(x) for x in row] for row in a]
    idx = list(range(len(m)))
    pos = neg = 0
    while idx:
        k = next((i for i in idx if m[i][i] != 0), None)
        if k is not None:
            d = m[k][k]
            if d > 0:
                pos += 1
            else:
                neg += 1
            idx.remove(k)
            for i in idx:
                if m[i][k]:
                    f = m[i][k] / d
                    for j in idx:
                        m[i][j] -= f * m[k][j]
            continue
        pair = next(((i, j) for i in idx for j in idx if i < j and m[i][j] != 0), None)
        if pair is None:
            break
        p, q = pair
        x = m[p][q]
        pos += 1
        neg += 1
        idx.remove(p)
        idx.remove(q)
        # inverse of [[0, x], [x, 0]] is [[0, 1/x], [1/x, 0]]
        for i in idx:
            ap, aq = m[i][p], m[i][q]
            if ap == 0 and aq == 0:
                continue
            for j in idx:
                bp, bq = m[p][j], m[q][j]
                m[i][j] -= (ap * bq + aq * bp) / x
    return pos, neg, len(m) - pos - neg


def count_eigs_at_most(pencil: FormPair, lam) -> int:
    """Number of eigenvalues of (M, N) that are <= lam (exact)."""
    _, neg, zero = inertia(_shifted(pencil, lam))
    return neg + zero


# ------------------------------------------------------- fixed-point engine


def fill_reducing_order(a: RationalMatrix) -> list[int]:
    """Minimum-degree ordering on the pattern of A (from SuperLU)."""
    n = a.shape[0]
    if n <= 2:
        return list(range(n))
    pattern = sp.csc_matrix(
        (np.ones(a.nnz), ([i for i, _ in a.data], [j for _, j in a.data])), shape=a.shape
    )
    pattern = pattern + sp.identity(n, format="csc") * (n + 1.0)
    lu = spla.splu(pattern, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                   options={"SymmetricMode": True})
    return [int(i) for i in np.argsort(lu.perm_c)]


def _scale_exponent(d: Fraction) -> int:
    """k with 4^k * d in [1, 4)."""
    k = -((d.numerator.bit_length() - d.denominator.bit_length()) // 2)

    def scaled_ge(c):
        # 4^k * d >= c
        if k >= 0:
            return d.numerator << (2 * k) >= c * d.denominator
        return d.numerator >= (c * d.denominator) << (-2 * k)

    while scaled_ge(4):
        k -= 1
    while not scaled_ge(1):
        k += 1
    return k


def _fixed_point_spd(a: RationalMatrix, order: list[int], bits: int) -> bool:
    """Sound positive-definiteness test in scaled fixed-point arithmetic.

    The matrix is first congruence-scaled by powers of two so that its
    diagonal lies in [1, 4).  Entries are then floored to integers at scale
    2^bits; the truncation matrix E has entries in [0, 1) and is dominated by
    the diagonal matrix of row counts, which is subtracted up front.  Each
    elimination step computes the Schur update with floor division; the
    rounding again lies in [0, 1) on the J x J block of the pivot column J, so
    subtracting |J| from those diagonal entries keeps the computed matrix below
    the exact Schur complement in the Loewner order.  Every pivot > 0 therefore
    proves that the original matrix is positive definite.
    """
    n = a.shape[0]
    diag_q, adj_q = _adjacency(a)
    shift = []
    for d in diag_q:
        if d <= 0:
            return False
        shift.append(_scale_exponent(d))

    def fix(v: Fraction, e: int) -> int:
        # floor(v * 2^e)
        if e >= 0:
            return (v.numerator << e) // v.denominator
        return v.numerator // (v.denominator << -e)

    diag = [0] * n
    adj = [dict() for _ in range(n)]
    for i in range(n):
        row = adj_q[i]
        diag[i] = fix(diag_q[i], bits + 2 * shift[i]) - (len(row) + 1)
        out = adj[i]
        for j, v in row.items():
            out[j] = fix(v, bits + shift[i] + shift[j])
    for k in order:
        d = diag[k]
        if d <= 0:
            return False
        col = adj[k]
        items = list(col.items())
        m = len(items)
        for i, gi in items:
            row = adj[i]
            del row[k]
            for j, gj in items:
                if j == i:
                    diag[i] -= (gi * gi) // d + m
                else:
                    row[j] = row.get(j, 0) - (gi * gj) // d
        adj[k] = None
    return True


def certify_lower(pencil: FormPair, lam_bar, exact: bool | None = None, bits: int = 112) -> bool:
    """True only if lambda_min(M, N) > lam_bar is proved."""
    lam_bar = as_fraction(lam_bar)
    a = _shifted(pencil, lam_bar)
    n = a.shape[0]
    if n == 0:
        return True
    if exact is None:
        exact = n <= EXACT_DIM
    order = fill_reducing_order(a) if n > 8 else list(range(n))
    if exact:
        return exact_ldl_positive(a, order)
    return _fixed_point_spd(a, order, bits)


def certify_upper(pencil: FormPair, v) -> BoundInterval:
    """Exact Rayleigh quotient v^T M v / v^T N v (an upper bound of lambda_min)."""
    q = [as_fraction(float(x)) if not isinstance(x, (int, Fraction)) else Fraction(x) for x in v]
    den = pencil.n.quad(q)
    if den == 0:
        raise ZeroDivisionError("v^T N v = 0")
    num = pencil.m.quad(q)
    return BoundInterval(Fraction(0) if num / den > 0 else num / den, num / den)


def _short(q: Fraction, sig_bits: int, direction: str) -> Fraction:
    """Round q to about ``sig_bits`` significant bits in the given direction."""
    if q == 0:
        return q
    e = sig_bits - (q.numerator.bit_length() - q.denominator.bit_length())
    scale = Fraction(2) ** e
    r = q * scale
    r = floor_div(r) if direction == "down" else ceil_div(r)
    return Fraction(r) / scale


def eig_enclose(pencil: FormPair, rel_tol=Fraction(1, 10**7), exact: bool | None = None,
                max_iter: int = 60) -> EigenEnclosure:
    """Enclosure [lo, hi] of lambda_min with (hi - lo)/hi <= rel_tol when it converges."""
    rel_tol = as_fraction(rel_tol)
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    lam_f, vec = smallest_eig_approx(pencil)
    hi = certify_upper(pencil, vec).hi
    if hi <= 0:
        raise CertificationError("Rayleigh quotient is not positive; M is not positive definite")
    lo = Fraction(0)
    upper_search = hi  # failed tests shrink this, but it is not a certified bound
    it = 0
    exact_mode = pencil.dim <= EXACT_DIM if exact is None else exact
    guess = min(hi, Fraction(lam_f)) if lam_f > 0 else hi
    # seeded attempts just below the approximation, then plain bisection
    for frac in (Fraction(1, 4), Fraction(1, 2)):
        cand = _short(guess * (1 - rel_tol * frac), 64, "down")
        it += 1
        if certify_lower(pencil, cand, exact):
            lo = cand
            break
        upper_search = min(upper_search, cand)
        if exact_mode:
            hi = min(hi, cand)
    while (hi - lo) > rel_tol * hi and it < max_iter:
        if upper_search - lo <= rel_tol * hi / 8:
            break
        mid = _short((lo + upper_search) / 2, 64, "down")
        if mid <= lo:
            break
        it += 1
        if certify_lower(pencil, mid, exact):
            lo = mid
        else:
            upper_search = mid
            if exact_mode:
                # exact failure means M - mid*N is not positive definite
                hi = min(hi, mid)
    converged = (hi - lo) <= rel_tol * hi
    return EigenEnclosure(BoundInterval(lo, hi), vec, converged, it,
                          "" if converged else "iteration cap reached before rel_tol")
