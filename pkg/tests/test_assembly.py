from fractions import Fraction

import pytest

from fmbounds.assembly import (
    assemble,
    assemble_float,
    conforming_poly_space,
    constrained_space,
    cr_interpolate,
    cr_shape_functions,
    fm_functionals,
    fm_interpolate,
    fm_shape_functions,
    local_matrices_fm,
    n_dofs,
    parent_interpolation,
    u0_matches_fm_kernel,
)
from fmbounds.geometry import canonical_triangle, make_triangle, refine_uniform
from fmbounds.polynomial import Poly, TriangleMoments, grad_inner, hess_inner, monomials

TRIANGLES = [
    canonical_triangle(0, 1),
    canonical_triangle(Fraction(1, 2), Fraction(7, 8)),
    canonical_triangle(Fraction(-2, 3), Fraction(1, 2)),
    canonical_triangle(Fraction(9, 10), Fraction(1, 10)),
]
QUADRATICS = [Poly.monomial(i, j) for i, j in monomials(2)] + [Poly({(2, 0): 3, (1, 1): -1, (0, 1): 2, (0, 0): 1})]


@pytest.mark.parametrize("t", TRIANGLES)
def test_fm_shape_functions_are_dual(t):
    funcs = fm_functionals(t)
    shapes = fm_shape_functions(t)
    for i, f in enumerate(funcs):
        for j, s in enumerate(shapes):
            assert f(s) == (1 if i == j else 0)


@pytest.mark.parametrize("t", TRIANGLES)
def test_cr_shapes_sum_to_one(t):
    total = sum(cr_shape_functions(t), Poly())
    assert total == Poly.const(1)


def test_local_matrix_x_squared():
    # D^2(x^2) : D^2(x^2) = 4, so the D2 energy of x^2 is 4|K|
    t = make_triangle((0, 0), (1, 0), (0, 1))
    loc = local_matrices_fm(t)
    p = Poly.monomial(2, 0)
    v = [f(p) for f in fm_functionals(t)]
    energy = sum(v[i] * loc.m_d2[i][j] * v[j] for i in range(6) for j in range(6))
    assert energy == 4 * Fraction(1, 2)


@pytest.mark.parametrize("t", TRIANGLES[:3])
@pytest.mark.parametrize("level", [1, 2])
def test_global_forms_reproduce_quadratics(t, level):
    mesh = refine_uniform(t, level)
    mats = {f: assemble(mesh, "FM", f) for f in ("D2", "GRAD", "L2")}
    mom = TriangleMoments(t, 4)
    for p in QUADRATICS:
        v = fm_interpolate(mesh, p)
        assert mats["L2"].quad(v) == mom.inner(p, p)
        assert mats["GRAD"].quad(v) == grad_inner(mom, p, p)
        assert mats["D2"].quad(v) == hess_inner(mom, p, p)


@pytest.mark.parametrize("t", TRIANGLES[:2])
def test_cr_forms_reproduce_linears(t):
    mesh = refine_uniform(t, 2)
    g = assemble(mesh, "CR", "GRAD")
    l2 = assemble(mesh, "CR", "L2")
    mom = TriangleMoments(t, 2)
    for p in (Poly.monomial(1, 0), Poly.monomial(0, 1), Poly({(1, 0): 2, (0, 1): -3, (0, 0): 1})):
        v = cr_interpolate(mesh, p)
        assert g.quad(v) == grad_inner(mom, p, p)
        assert l2.quad(v) == mom.inner(p, p)


def test_symmetry_and_float_assembly():
    mesh = refine_uniform(TRIANGLES[1], 2)
    for elem, form in (("FM", "D2"), ("FM", "L2"), ("CR", "GRAD")):
        a = assemble(mesh, elem, form)
        assert a.is_symmetric()
        diff = abs(assemble_float(mesh, elem, form).toarray() - a.to_numpy()).max()
        assert diff < 1e-12


def test_level0_matches_element():
    t = TRIANGLES[1]
    mesh = refine_uniform(t, 0)
    loc = local_matrices_fm(t)
    a = assemble(mesh, "FM", "L2").to_dense()
    # one element: only the edge signs can differ
    for i in range(6):
        assert abs(a[i][i]) == loc.m_l2[i][i]


def test_unknown_form_rejected():
    mesh = refine_uniform(TRIANGLES[0], 1)
    with pytest.raises(ValueError):
        assemble(mesh, "CR", "D2")
    with pytest.raises(ValueError):
        constrained_space(mesh, "nonsense")


@pytest.mark.parametrize("level", [1, 2])
def test_parent_interpolation_projects(level):
    t = TRIANGLES[1]
    mesh = refine_uniform(t, level)
    p_mat = parent_interpolation(mesh)
    for q in QUADRATICS:
        v = fm_interpolate(mesh, q)
        assert p_mat.matvec(v) == v
    ker = constrained_space(mesh, "FM_kernel")
    zero = p_mat.matmul(ker.basis)
    assert zero.nnz == 0


@pytest.mark.parametrize("kind,rows", [("FM_kernel", 6), ("Lagrange_zero", 3), ("CR_kernel", 3), ("FM_full", 0)])
def test_constrained_space_dimensions(kind, rows):
    mesh = refine_uniform(TRIANGLES[2], 2)
    sp_ = constrained_space(mesh, kind)
    elem = "CR" if kind == "CR_kernel" else "FM"
    assert sp_.dim == n_dofs(mesh, elem) - rows
    assert sp_.residual_is_zero()
    assert sp_.has_full_rank()


@pytest.mark.parametrize("t", TRIANGLES[:3])
def test_u0_equals_fm_kernel(t):
    mesh = refine_uniform(t, 2)
    d2 = assemble(mesh, "FM", "D2")
    ker = constrained_space(mesh, "FM_kernel")
    assert u0_matches_fm_kernel(mesh, d2, ker)
    u0 = constrained_space(mesh, "U0_orthogonal", d2)
    assert u0.dim == ker.dim


def test_conforming_spaces():
    t = TRIANGLES[1]
    with pytest.raises(ValueError):
        conforming_poly_space(t, 2, "FM_kernel")
    assert len(conforming_poly_space(t, 2, "Lagrange_zero").basis) == 3
    ps = conforming_poly_space(t, 4, "FM_kernel")
    assert len(ps.basis) == 15 - 6
    for b in ps.basis:
        assert all(f(b) == 0 for f in fm_functionals(t))
