"""Exact Fujino-Morley / Crouzeix-Raviart matrices and constrained subspaces."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .geometry import DegenerateTriangleError, Mesh, Point2, Triangle
from .polynomial import (
    Poly,
    TriangleMoments,
    grad_inner,
    hess_inner,
    monomials,
    normal_moment,
    segment_integral,
)
from .sparse import RationalMatrix, columns_to_matrix, exact_rank, rref_nullspace

FORMS = ("D2", "GRAD", "L2")
ELEMENTS = ("FM", "CR")
KINDS = ("FM_kernel", "Lagrange_zero", "CR_kernel", "U0_orthogonal", "FM_full")


@dataclass(frozen=True)
class ElementMatrices:
    m_d2: tuple | None
    m_grad: tuple
    m_l2: tuple

    def form(self, name: str):
        return {"D2": self.m_d2, "GRAD": self.m_grad, "L2": self.m_l2}[name]


@dataclass
class FormPair:
    """Reduced pencil (M, N) on a constrained subspace."""

    m: RationalMatrix
    n: RationalMatrix
    positions: list | None = None
    label: str = ""

    @property
    def dim(self) -> int:
        return self.m.shape[0]


def _inverse(mat: list) -> list:
    n = len(mat)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for c in range(n):
        p = next((r for r in range(c, n) if aug[r][c] != 0), None)
        if p is None:
            raise DegenerateTriangleError("singular degree-of-freedom matrix")
        aug[c], aug[p] = aug[p], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[c])]
    return [row[n:] for row in aug]


def _local_points(t: Triangle) -> list[Point2]:
    return [Point2(0, 0), t.a - t.o, t.b - t.o]


def fm_functionals(t: Triangle):
    """The six FM degrees of freedom as callables on polynomials (origin at t.o).

    Order: values at the three vertices, then the normal moment of the edge
    opposite each vertex, with the element's outward normal.
    """
    pts = _local_points(t)
    funcs = [lambda p, q=q: p(q.x, q.y) for q in pts]
    for k in range(3):
        a, b = pts[(k + 1) % 3], pts[(k + 2) % 3]
        funcs.append(lambda p, a=a, b=b: normal_moment(p, a, b))
    return funcs


def fm_shape_functions(t: Triangle) -> list[Poly]:
    if t.area2 == 0:
        raise DegenerateTriangleError("zero-area element")
    mono = [Poly.monomial(i, j) for i, j in monomials(2)]
    funcs = fm_functionals(t)
    dof = [[f(m) for m in mono] for f in funcs]
    c = _inverse(dof)
    return [sum((mono[m] * c[m][k] for m in range(6)), Poly()) for k in range(6)]


def cr_shape_functions(t: Triangle) -> list[Poly]:
    if t.area2 == 0:
        raise DegenerateTriangleError("zero-area element")
    pts = _local_points(t)
    mono = [Poly.monomial(i, j) for i, j in monomials(1)]
    mids = [Point2((pts[(k + 1) % 3].x + pts[(k + 2) % 3].x) / 2, (pts[(k + 1) % 3].y + pts[(k + 2) % 3].y) / 2)
            for k in range(3)]
    dof = [[m(q.x, q.y) for m in mono] for q in mids]
    c = _inverse(dof)
    return [sum((mono[m] * c[m][k] for m in range(3)), Poly()) for k in range(3)]


def _gram(shapes: list[Poly], mom: TriangleMoments, inner) -> tuple:
    n = len(shapes)
    out = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            out[i][j] = out[j][i] = inner(mom, shapes[i], shapes[j])
    return tuple(tuple(r) for r in out)


def _l2_inner(mom, p, q):
    return mom.inner(p, q)


@lru_cache(maxsize=256)
def _fm_cached(e1x, e1y, e2x, e2y) -> ElementMatrices:
    t = Triangle(Point2(0, 0), Point2(e1x, e1y), Point2(e2x, e2y))
    shapes = fm_shape_functions(t)
    mom = TriangleMoments(t, 4)
    return ElementMatrices(_gram(shapes, mom, hess_inner), _gram(shapes, mom, grad_inner), _gram(shapes, mom, _l2_inner))


@lru_cache(maxsize=256)
def _cr_cached(e1x, e1y, e2x, e2y) -> ElementMatrices:
    t = Triangle(Point2(0, 0), Point2(e1x, e1y), Point2(e2x, e2y))
    shapes = cr_shape_functions(t)
    mom = TriangleMoments(t, 2)
    return ElementMatrices(None, _gram(shapes, mom, grad_inner), _gram(shapes, mom, _l2_inner))


def _shape_key(t: Triangle):
    e1, e2 = t.a - t.o, t.b - t.o
    return (e1.x, e1.y, e2.x, e2.y)


def local_matrices_fm(t: Triangle) -> ElementMatrices:
    return _fm_cached(*_shape_key(t))


def local_matrices_cr(t: Triangle) -> ElementMatrices:
    return _cr_cached(*_shape_key(t))


# ------------------------------------------------------------------ assembly


def n_dofs(mesh: Mesh, element: str) -> int:
    return mesh.n_vertices + mesh.n_edges if element == "FM" else mesh.n_edges


def _element_dofs(mesh: Mesh, element: str, k: int):
    nv = mesh.n_vertices
    edges = mesh.element_edges[k]
    if element == "FM":
        return [(v, 1) for v in mesh.elements[k]] + [(nv + e, s) for e, s in edges]
    return [(e, 1) for e, _ in edges]


def _local(mesh: Mesh, element: str, k: int) -> ElementMatrices:
    t = mesh.element_triangle(k)
    return local_matrices_fm(t) if element == "FM" else local_matrices_cr(t)


def assemble(mesh: Mesh, element: str, form: str) -> RationalMatrix:
    """Exact global matrix of ``form`` for the FM or CR space on ``mesh``."""
    if element not in ELEMENTS or form not in FORMS:
        raise ValueError(f"unknown element/form {element}/{form}")
    if element == "CR" and form == "D2":
        raise ValueError("D2 form vanishes on the CR space")
    acc: dict = {}
    for k in range(mesh.n_elements):
        loc = _local(mesh, element, k).form(form)
        dofs = _element_dofs(mesh, element, k)
        for a, (ga, sa) in enumerate(dofs):
            row = loc[a]
            for b, (gb, sb) in enumerate(dofs):
                v = row[b]
                if v:
                    key = (ga, gb)
                    acc[key] = acc.get(key, 0) + (v if sa == sb else -v)
    n = n_dofs(mesh, element)
    return RationalMatrix((n, n), acc)


def assemble_float(mesh: Mesh, element: str, form: str) -> sp.csr_matrix:
    """Floating-point assembly for approximate runs on fine meshes."""
    rows, cols, vals = [], [], []
    for k in range(mesh.n_elements):
        loc = np.array(_local(mesh, element, k).form(form), dtype=float)
        dofs = _element_dofs(mesh, element, k)
        g = np.array([d for d, _ in dofs])
        s = np.array([x for _, x in dofs], dtype=float)
        loc = loc * np.outer(s, s)
        rows.append(np.repeat(g, len(g)))
        cols.append(np.tile(g, len(g)))
        vals.append(loc.ravel())
    n = n_dofs(mesh, element)
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def dof_positions(mesh: Mesh, element: str) -> list[tuple[float, float]]:
    """Reference-lattice coordinates of each global DOF (used for orderings)."""
    mids = [mesh.edge_midpoint_lattice(e) for e in range(mesh.n_edges)]
    if element == "FM":
        return [tuple(map(float, p)) for p in mesh.lattice] + mids
    return mids


# ----------------------------------------------------------- interpolation


def fm_interpolate(mesh: Mesh, p: Poly, origin: Point2 | None = None) -> list[Fraction]:
    """Global FM DOF vector of the polynomial ``p`` (written relative to ``origin``)."""
    origin = mesh.parent.o if origin is None else origin
    pts = [v - origin for v in mesh.vertices]
    out = [p(q.x, q.y) for q in pts]
    for i, j in mesh.edges:
        # global normal: tangent lo->hi rotated by +90 degrees, i.e. (-t_y, t_x)
        out.append(-normal_moment(p, pts[i], pts[j]))
    return out


def cr_interpolate(mesh: Mesh, p: Poly, origin: Point2 | None = None) -> list[Fraction]:
    origin = mesh.parent.o if origin is None else origin
    pts = [v - origin for v in mesh.vertices]
    return [segment_integral(p, pts[i], pts[j]) for i, j in mesh.edges]


def parent_fm_rows(mesh: Mesh) -> list[dict]:
    """Parent-element FM DOFs as sparse rows over the global FM DOFs.

    Three corner values, then the aggregated normal moment on OA, AB, BO.
    """
    nv = mesh.n_vertices
    rows = [{c: Fraction(1)} for c in mesh.corners]
    for side in mesh.sides:
        rows.append({nv + e: Fraction(s) for e, s in side})
    return rows


def parent_cr_rows(mesh: Mesh) -> list[dict]:
    """Parent edge means (up to the factor 1/N) over the global CR DOFs."""
    return [{e: Fraction(1) for e, _ in side} for side in mesh.sides]


def parent_interpolation(mesh: Mesh) -> RationalMatrix:
    """Matrix of v -> Pi_K^FM v on the global FM DOFs (Pi_K on the parent)."""
    t = mesh.parent
    shapes = fm_shape_functions(t)
    # parent DOF order matches fm_functionals: vertices O, A, B; edges opposite O, A, B
    rows = parent_fm_rows(mesh)
    # sides are OA, AB, BO which are opposite B, O, A
    side_for_local_edge = {0: 4, 1: 5, 2: 3}
    ordered = rows[:3] + [rows[side_for_local_edge[k]] for k in range(3)]
    images = [fm_interpolate(mesh, s) for s in shapes]
    data: dict = {}
    for k in range(6):
        col = images[k]
        for j, w in ordered[k].items():
            for i, v in enumerate(col):
                if v:
                    data[(i, j)] = data.get((i, j), 0) + v * w
    n = n_dofs(mesh, "FM")
    return RationalMatrix((n, n), data)


# -------------------------------------------------------- constrained spaces


@dataclass
class ConstrainedSpace:
    kind: str
    element: str
    ambient_dim: int
    basis: RationalMatrix
    constraint_rows: list = field(repr=False, default_factory=list)
    positions: list = field(repr=False, default_factory=list)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def residual_is_zero(self) -> bool:
        cols = self.basis.cols()
        for row in self.constraint_rows:
            for col in cols.values():
                if sum((w * col[i] for i, w in row.items() if i in col), Fraction(0)) != 0:
                    return False
        return True

    def has_full_rank(self) -> bool:
        return sparse_column_rank(self.basis) == self.dim


def sparse_column_rank(z: RationalMatrix) -> int:
    """Exact column rank by incremental sparse elimination."""
    pivots: dict = {}
    for _, col in sorted(z.cols().items()):
        v = dict(col)
        while v:
            lead = min(v)
            piv = pivots.get(lead)
            if piv is None:
                pivots[lead] = v
                break
            f = v[lead] / piv[lead]
            for i, w in piv.items():
                x = v.get(i, 0) - f * w
                if x:
                    v[i] = x
                else:
                    v.pop(i, None)
    return len(pivots)


def _difference_columns(side, scale_signs: bool):
    # x_1 = s_1 y_1, x_j = s_j (y_j - y_{j-1}), x_N = -s_N y_{N-1}
    cols = []
    for j in range(len(side) - 1):
        (e0, s0), (e1, s1) = side[j], side[j + 1]
        if scale_signs:
            cols.append({e0: Fraction(s0), e1: Fraction(-s1)})
        else:
            cols.append({e0: Fraction(1), e1: Fraction(-1)})
    return cols


def constrained_space(mesh: Mesh, kind: str, d2: RationalMatrix | None = None) -> ConstrainedSpace:
    """Exact basis of the constrained subspace ``kind`` on ``mesh``."""
    if kind not in KINDS:
        raise ValueError(f"unknown space kind {kind!r}")
    nv = mesh.n_vertices
    element = "CR" if kind == "CR_kernel" else "FM"
    n = n_dofs(mesh, element)
    pos = dof_positions(mesh, element)

    if kind in ("FM_kernel", "Lagrange_zero", "FM_full", "CR_kernel"):
        if kind == "CR_kernel":
            rows = parent_cr_rows(mesh)
            side_edges = {e for side in mesh.sides for e, _ in side}
            free = [e for e in range(n) if e not in side_edges]
            extra = [c for side in mesh.sides for c in _difference_columns(side, False)]
        else:
            rows = parent_fm_rows(mesh)
            if kind == "Lagrange_zero":
                rows = rows[:3]
            elif kind == "FM_full":
                rows = []
            fixed = set(mesh.corners) if kind != "FM_full" else set()
            if kind == "FM_kernel":
                side_edges = {nv + e for side in mesh.sides for e, _ in side}
                extra = [{nv + k: v for k, v in c.items()} for side in mesh.sides
                         for c in _difference_columns(side, True)]
            else:
                side_edges = set()
                extra = []
            free = [i for i in range(n) if i not in fixed and i not in side_edges]
        cols = [{i: Fraction(1)} for i in free] + extra
    else:
        if d2 is None:
            d2 = assemble(mesh, "FM", "D2")
        rows = u0_rows(mesh, d2)
        if exact_rank([_dense_row(r, n) for r in rows]) != len(rows):
            raise ValueError("U0 constraint rows are rank deficient")
        basis, _ = rref_nullspace([_dense_row(r, n) for r in rows], n)
        cols = [{i: v for i, v in enumerate(b) if v} for b in basis]

    data = {(i, j): v for j, c in enumerate(cols) for i, v in c.items()}
    z = RationalMatrix((n, len(cols)), data)
    col_pos = []
    for c in cols:
        ps = [pos[i] for i in c]
        col_pos.append((sum(p[0] for p in ps) / len(ps), sum(p[1] for p in ps) / len(ps)))
    space = ConstrainedSpace(kind, element, n, z, rows, col_pos)
    if kind != "U0_orthogonal" and rows and exact_rank([_dense_row(r, n) for r in rows]) != len(rows):
        raise ValueError("constraint rows are rank deficient")
    if space.dim != n - len(rows):
        raise ValueError(f"{kind}: basis dimension {space.dim} does not match {n} - {len(rows)}")
    return space


def _dense_row(row: dict, n: int) -> list:
    out = [Fraction(0)] * n
    for i, v in row.items():
        out[i] = v
    return out


def u0_rows(mesh: Mesh, d2: RationalMatrix) -> list[dict]:
    """Rows of (D^2 v, D^2 p) = 0 for p in {x^2, xy, y^2}, plus the three corner values.

    The corner rows remove the linear functions, which lie in the kernel of
    both forms of the interpolation-difference pencil.
    """
    rows = [{c: Fraction(1)} for c in mesh.corners]
    for i, j in ((2, 0), (1, 1), (0, 2)):
        v = fm_interpolate(mesh, Poly.monomial(i, j))
        w = d2.matvec(v)
        rows.append({k: x for k, x in enumerate(w) if x})
    return rows


def reduce_pair(m: RationalMatrix, n: RationalMatrix, space: ConstrainedSpace, label: str = "") -> FormPair:
    z = space.basis
    return FormPair(m.congruence(z), n.congruence(z), list(space.positions), label)


def u0_matches_fm_kernel(mesh: Mesh, d2: RationalMatrix, kernel: ConstrainedSpace) -> bool:
    """Exact check that U0 (with corner rows) equals the FM kernel space.

    Every kernel column must satisfy the U0 rows, the U0 rows must have full
    rank 6, and the dimensions must agree.
    """
    rows = u0_rows(mesh, d2)
    n = kernel.ambient_dim
    if exact_rank([_dense_row(r, n) for r in rows]) != len(rows):
        return False
    for col in kernel.basis.cols().values():
        for r in rows:
            if sum((w * col[i] for i, w in r.items() if i in col), Fraction(0)) != 0:
                return False
    return kernel.dim == n - len(rows)


# --------------------------------------------------- conforming polynomials


@dataclass
class PolySpace:
    triangle: Triangle
    degree: int
    kind: str
    basis: list  # list of Poly, origin at triangle.o
    pair: FormPair


def conforming_poly_space(t: Triangle, m: int, kind: str, form: str = "L2") -> PolySpace:
    """Constrained subspace of P^m(K) and its reduced pencil.

    For FM_kernel / Lagrange_zero the pencil is (D2, form); for CR_kernel it is
    (GRAD, L2).
    """
    if m < 1:
        raise ValueError("degree must be positive")
    mono = [Poly.monomial(i, j) for i, j in monomials(m)]
    pts = _local_points(t)
    rows = []
    if kind in ("FM_kernel", "Lagrange_zero"):
        rows += [[p(q.x, q.y) for p in mono] for q in pts]
        if kind == "FM_kernel":
            for k in range(3):
                a, b = pts[k], pts[(k + 1) % 3]
                rows.append([normal_moment(p, a, b) for p in mono])
    elif kind == "CR_kernel":
        for k in range(3):
            a, b = pts[k], pts[(k + 1) % 3]
            rows.append([segment_integral(p, a, b) for p in mono])
    else:
        raise ValueError(f"unsupported polynomial space kind {kind!r}")
    null, _ = rref_nullspace(rows, len(mono))
    if not null:
        raise ValueError(f"the constrained space of degree {m} is empty")
    basis = [sum((mono[i] * c for i, c in enumerate(vec) if c), Poly()) for vec in null]
    mom = TriangleMoments(t, 2 * m)
    if kind == "CR_kernel":
        m_inner, n_inner = grad_inner, _l2_inner
    else:
        m_inner = hess_inner
        n_inner = {"L2": _l2_inner, "GRAD": grad_inner}[form]
    g_m = RationalMatrix.from_dense(_gram(basis, mom, m_inner))
    g_n = RationalMatrix.from_dense(_gram(basis, mom, n_inner))
    return PolySpace(t, m, kind, basis, FormPair(g_m, g_n, None, f"P{m}-{kind}"))


__all__ = [
    "ElementMatrices",
    "FormPair",
    "ConstrainedSpace",
    "PolySpace",
    "local_matrices_fm",
    "local_matrices_cr",
    "assemble",
    "assemble_float",
    "constrained_space",
    "conforming_poly_space",
    "reduce_pair",
    "fm_interpolate",
    "cr_interpolate",
    "parent_fm_rows",
    "parent_interpolation",
    "u0_rows",
    "u0_matches_fm_kernel",
    "columns_to_matrix",
]
