from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fmbounds.geometry import (
    DegenerateTriangleError,
    DomainError,
    OmegaPoint,
    PiAngle,
    ShapeMap,
    arc_factors,
    canonical_triangle,
    circle_point,
    half_angle_tangent_upper,
    make_triangle,
    q_spectral_factors,
    refine_uniform,
    t_matrix,
    theta_grid_c0,
    theta_grid_gamma2,
)
from fmbounds.polynomial import Poly, TriangleMoments, grad_inner, hess_inner

fracs = st.fractions(min_value=-2, max_value=2, max_denominator=50)
betas = st.fractions(min_value=Fraction(1, 10), max_value=3, max_denominator=50)


@pytest.mark.parametrize("level", [0, 1, 2, 3])
def test_mesh_counts_and_euler(level):
    t = canonical_triangle(Fraction(3, 5), Fraction(4, 5))
    m = refine_uniform(t, level)
    n = 2**level
    assert m.n_vertices == (n + 1) * (n + 2) // 2
    assert m.n_edges == 3 * n * (n + 1) // 2
    assert m.n_elements == n * n
    assert m.n_vertices - m.n_edges + m.n_elements == 1
    assert sum(abs(m.element_triangle(k).area2) for k in range(m.n_elements)) == abs(t.area2)
    assert all(m.element_triangle(k).diam2 == m.h2 for k in range(m.n_elements))
    assert all(len(side) == n for side in m.sides)
    assert [m.vertices[c] for c in m.corners] == list(t.vertices)


def test_mesh_edges_shared_by_at_most_two():
    m = refine_uniform(canonical_triangle(0, 1), 3)
    count = [0] * m.n_edges
    for edges in m.element_edges:
        for e, _ in edges:
            count[e] += 1
    boundary = {e for side in m.sides for e, _ in side}
    assert all(c == (1 if e in boundary else 2) for e, c in enumerate(count))


def test_interior_edge_signs_cancel():
    # the two elements sharing an interior edge see opposite outward normals
    m = refine_uniform(canonical_triangle(Fraction(1, 2), Fraction(7, 8)), 2)
    total = [0] * m.n_edges
    for edges in m.element_edges:
        for e, s in edges:
            total[e] += s
    boundary = {e for side in m.sides for e, _ in side}
    assert all(total[e] == 0 for e in range(m.n_edges) if e not in boundary)


def test_degenerate_and_domain_errors():
    with pytest.raises(DegenerateTriangleError):
        make_triangle((0, 0), (1, 0), (2, 0))
    with pytest.raises(DomainError):
        OmegaPoint(Fraction(1, 4), Fraction(1, 2))
    with pytest.raises(ValueError):
        refine_uniform(canonical_triangle(0, 1), -1)


def test_scaled_triangle():
    t = canonical_triangle(Fraction(1, 2), Fraction(1, 3))
    assert t.scaled(3).diam2 == 9 * t.diam2
    assert t.scaled(Fraction(1, 2)).area2 == t.area2 / 4


def test_theta_grids():
    g = theta_grid_c0()
    assert len(g) == 60
    assert g[-1][0] == PiAngle(Fraction(1, 3))
    assert sum((tau.frac for _, tau in g), Fraction(0)) == Fraction(1, 3)
    steps = [tau.frac for _, tau in g]
    assert steps[-2] < steps[-12]  # refined towards pi/3
    g2 = theta_grid_gamma2()
    assert len(g2) == 98 and g2[-1][0] == PiAngle(Fraction(98, 300))


def test_circle_points_and_tangents():
    for i in (1, 10, 30, 49):
        th = PiAngle(Fraction(i, 150))
        t = half_angle_tangent_upper(th)
        p = circle_point(t)
        assert p.x * p.x + p.y * p.y == 1
        ref = mpmath.tan(mpmath.pi * i / 300)
        assert float(t) >= ref - 1e-15
        assert float(t) - ref < 1e-13


def test_arc_factors_identity():
    rho, eta = arc_factors(PiAngle(Fraction(1, 6)), PiAngle(Fraction(-1, 60)))
    th, ta = mpmath.pi / 6, -mpmath.pi / 60
    r = mpmath.cos((th + ta) / 2) / mpmath.cos(th / 2)
    e = mpmath.sin((th + ta) / 2) / mpmath.sin(th / 2)
    assert float(rho.lo) <= r + 1e-15 and r - 1e-15 <= float(rho.hi)
    assert float(eta.lo) <= e + 1e-15 and e - 1e-15 <= float(eta.hi)
    assert eta.hi < 1 < rho.lo


# ------------------------------------------------------------ Lemma 4.1


def _brute_eigs(mat):
    a = np.array([[float(x) for x in row] for row in mat])
    return np.linalg.eigvalsh(a.T @ a)


@settings(max_examples=100)
@given(fracs, betas)
def test_q_spectral_factors_against_brute_force(alpha, beta):
    m = ShapeMap(alpha, beta)
    lmin, lmax = q_spectral_factors(m)
    w = _brute_eigs(m.matrix())
    tol = 1e-12 * max(1.0, w[-1])
    assert float(lmin.lo) - tol <= w[0] <= float(lmin.hi) + tol
    assert float(lmax.lo) - tol <= w[-1] <= float(lmax.hi) + tol
    # det(Q^t Q) = beta^2 and trace = 1 + alpha^2 + beta^2, exactly
    assert (lmin * lmax).contains(beta * beta)
    assert (lmin + lmax).contains(1 + alpha * alpha + beta * beta)


@settings(max_examples=100)
@given(fracs, betas)
def test_t_matrix_eigenvalues_are_squares(alpha, beta):
    lmin, lmax = q_spectral_factors(ShapeMap(alpha, beta))
    w = _brute_eigs(t_matrix(alpha, beta))
    tol = 1e-10 * max(1.0, w[-1])
    assert abs(w[0] - float(lmin.square().mid)) <= tol
    assert abs(w[-1] - float(lmax.square().mid)) <= tol


def _pull_back(p: Poly, alpha, beta) -> Poly:
    """u(x, y) = p(x + alpha y, beta y)."""
    out = Poly()
    xa = Poly({(1, 0): 1, (0, 1): alpha})
    yb = Poly({(0, 1): beta})
    for (i, j), c in p.c.items():
        term = Poly.const(c)
        for _ in range(i):
            term = term * xa
        for _ in range(j):
            term = term * yb
        out = out + term
    return out


poly_coeffs = st.lists(st.integers(-5, 5), min_size=10, max_size=10)


@settings(max_examples=100)
@given(fracs, betas, poly_coeffs)
def test_lemma41_norm_identities_exact(alpha, beta, coeffs):
    k = canonical_triangle(Fraction(1, 2), Fraction(2, 3))
    q = ShapeMap(alpha, beta)
    qk = make_triangle(k.o, q.apply(k.a), q.apply(k.b))
    exps = [(i, j) for i in range(4) for j in range(4 - i)]
    ut = Poly({e: c for e, c in zip(exps, coeffs)})
    u = _pull_back(ut, alpha, beta)
    mk, mq = TriangleMoments(k, 8), TriangleMoments(qk, 8)
    # L2 norm: |u|_K^2 = |u~|_QK^2 / det Q
    assert mk.inner(u, u) == mq.inner(ut, ut) / beta
    # gradient: grad u = Q^t grad u~
    gx, gy = ut.dx(), ut.dy()
    lhs = grad_inner(mk, u, u)
    rhs = (mq.inner(gx, gx) + mq.inner(alpha * gx + beta * gy, alpha * gx + beta * gy)) / beta
    assert lhs == rhs
    # Hessian: D2u = Q^t D2u~ Q, i.e. vec(D2u) = T vec(D2u~)
    t = t_matrix(alpha, beta)
    hxx, hxy, hyy = ut.dx().dx(), ut.dx().dy(), ut.dy().dy()
    vec = [hxx, hxy, hxy, hyy]
    mapped = [sum((t[r][c] * vec[c] for c in range(4)), Poly()) for r in range(4)]
    direct = hess_inner(mk, u, u)
    via_t = sum((mq.inner(p, p) for p in mapped), Fraction(0)) / beta
    assert direct == via_t
    # and the spectral bounds of Lemma 4.1 hold
    lmin, lmax = q_spectral_factors(q)
    g2 = mq.inner(gx, gx) + mq.inner(gy, gy)
    if g2:
        assert lmin.lo * g2 / beta <= lhs <= lmax.hi * g2 / beta
    h2 = hess_inner(mq, ut, ut)
    if h2:
        assert (lmin.lo ** 2) * h2 / beta <= direct <= (lmax.hi ** 2) * h2 / beta
