import numpy as np
import pytest

from hybridtools.fvm import (LaplacianOperator, divergence, face_flux, face_gradient_flux, gradient,
                             laplacian_apply, neumann_faces, upwind_convect)
from hybridtools.mesh import BoundarySpec, Dirichlet, StructuredGrid
from hybridtools.mesh.boundary import HI, LO, all_faces


def unit_grid(nx, ny):
    return StructuredGrid((nx, ny), (float(nx), float(ny)))


def test_face_flux_of_rest_state():
    grid = unit_grid(4, 4)
    for phi in face_flux(grid, np.zeros((2,) + grid.shape)):
        assert not phi.any()


def test_face_flux_uniform_velocity():
    grid = unit_grid(4, 4)
    u = np.zeros((2,) + grid.shape)
    u[0] = 1.0
    phi_x, phi_y = face_flux(grid, u)
    np.testing.assert_array_equal(phi_x[:, 1:-1], 1.0)
    np.testing.assert_array_equal(phi_x[:, [0, -1]], 0.0)
    np.testing.assert_array_equal(phi_y, 0.0)


def test_closed_cavity_conserves_mass(rng):
    grid = unit_grid(4, 4)
    div = divergence(grid, face_flux(grid, rng.standard_normal((2,) + grid.shape)))
    assert abs(div.sum()) < 1e-12


def test_divergence_of_linear_flux():
    grid = unit_grid(5, 4)
    phi_x = np.broadcast_to(grid.faces(0), grid.face_shape(0)).copy()
    phi_y = np.zeros(grid.face_shape(1))
    np.testing.assert_allclose(divergence(grid, (phi_x, phi_y)), 1.0, rtol=0, atol=1e-14)


def test_divergence_of_uniform_flux():
    grid = StructuredGrid((6, 3), (1.0, 0.5))
    phi = (np.full(grid.face_shape(0), 0.3), np.full(grid.face_shape(1), -2.0))
    np.testing.assert_allclose(divergence(grid, phi), 0.0, atol=1e-13)


def test_divergence_matches_face_loop(rng):
    grid = StructuredGrid((4, 4), (1.0, 2.0))
    phi = tuple(rng.standard_normal(grid.face_shape(a)) for a in range(2))
    expected = np.zeros(grid.shape)
    for j in range(4):
        for i in range(4):
            net = phi[0][j, i + 1] - phi[0][j, i] + phi[1][j + 1, i] - phi[1][j, i]
            expected[j, i] = net / grid.cell_volume
    np.testing.assert_allclose(divergence(grid, phi), expected, rtol=1e-14, atol=1e-14)


def test_gradient_exact_on_linear_fields():
    grid = StructuredGrid((6, 5), (1.0, 1.0))
    x, y = grid.mesh()
    grad = gradient(grid, 3.0 * x + 1.0, neumann_faces(2))
    np.testing.assert_allclose(grad[0][:, 1:-1], 3.0, rtol=1e-12)
    np.testing.assert_allclose(grad[1], 0.0, atol=1e-12)


def test_gradient_of_constant_is_zero():
    grid = unit_grid(5, 5)
    faces = {face: Dirichlet(4.0) for face in all_faces(2)}
    assert not gradient(grid, np.full(grid.shape, 4.0), faces).any()
    assert not gradient(grid, np.full(grid.shape, 4.0), neumann_faces(2)).any()


def test_gradient_second_order_convergence():
    errors = []
    for n in (16, 32, 64):
        grid = StructuredGrid((n, n), (1.0, 1.0))
        x, _ = grid.mesh()
        grad = gradient(grid, np.sin(2 * np.pi * x), neumann_faces(2))
        exact = 2 * np.pi * np.cos(2 * np.pi * x)
        errors.append(np.abs(grad[0] - exact)[:, 1:-1].max())
    slopes = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    np.testing.assert_allclose(slopes, 2.0, atol=0.2)


def test_upwind_constant_scalar_with_solenoidal_flux():
    grid = unit_grid(5, 4)
    phi = (np.full(grid.face_shape(0), 1.5), np.zeros(grid.face_shape(1)))
    np.testing.assert_allclose(upwind_convect(grid, phi, np.full(grid.shape, 7.0)), 0.0, atol=1e-13)


def test_upwind_takes_the_upstream_cell():
    grid = unit_grid(5, 3)
    phi = (np.ones(grid.face_shape(0)), np.zeros(grid.face_shape(1)))
    s = np.broadcast_to(np.array([1.0, 4.0, 9.0, 16.0, 25.0]), grid.shape).copy()
    out = upwind_convect(grid, phi, s)
    np.testing.assert_array_equal(out, np.broadcast_to([0.0, 3.0, 5.0, 7.0, 9.0], grid.shape))


def test_upwind_matches_face_loop(rng):
    grid = StructuredGrid((5, 5), (1.0, 1.0))
    faces = BoundarySpec.cavity(2, 307.75, 288.15)['T']
    phi = tuple(rng.standard_normal(grid.face_shape(a)) for a in range(2))
    s = 290.0 + 10.0 * rng.random(grid.shape)

    def wall_value(axis, side, inside):
        cond = faces[(axis, side)]
        return cond.value if isinstance(cond, Dirichlet) else inside

    expected = np.zeros(grid.shape)
    for j in range(5):
        for i in range(5):
            total = 0.0
            # x faces: i (west) and i + 1 (east)
            for k, sign in ((i, -1.0), (i + 1, 1.0)):
                f = phi[0][j, k]
                if k == 0:
                    value = wall_value(0, LO, s[j, 0]) if f >= 0 else s[j, 0]
                elif k == 5:
                    value = s[j, 4] if f >= 0 else wall_value(0, HI, s[j, 4])
                else:
                    value = s[j, k - 1] if f >= 0 else s[j, k]
                total += sign * f * value
            for k, sign in ((j, -1.0), (j + 1, 1.0)):
                f = phi[1][k, i]
                if k == 0:
                    value = wall_value(1, LO, s[0, i]) if f >= 0 else s[0, i]
                elif k == 5:
                    value = s[4, i] if f >= 0 else wall_value(1, HI, s[4, i])
                else:
                    value = s[k - 1, i] if f >= 0 else s[k, i]
                total += sign * f * value
            expected[j, i] = total / grid.cell_volume
    np.testing.assert_allclose(upwind_convect(grid, phi, s, faces), expected, rtol=1e-14, atol=1e-10)


def test_laplacian_of_linear_field_is_zero_inside():
    grid = unit_grid(6, 6)
    x, y = grid.mesh()
    lap = laplacian_apply(grid, 2.0 * x - y, 1.0, neumann_faces(2))
    np.testing.assert_allclose(lap[1:-1, 1:-1], 0.0, atol=1e-12)


def test_laplacian_of_square():
    grid = unit_grid(6, 6)
    x, _ = grid.mesh()
    lap = laplacian_apply(grid, x ** 2, 0.3, neumann_faces(2))
    np.testing.assert_allclose(lap[:, 1:-1], 0.6, rtol=1e-12)


def test_face_gradient_flux_is_discrete_laplacian(rng):
    grid = StructuredGrid((6, 5), (1.0, 0.7))
    faces = BoundarySpec.cavity(2, 307.75, 288.15)['T']
    s = 290.0 + rng.random(grid.shape)
    np.testing.assert_allclose(divergence(grid, face_gradient_flux(grid, s, faces)),
                               laplacian_apply(grid, s, 1.0, faces), rtol=1e-10, atol=1e-8)


@pytest.mark.parametrize('dims', [(6, 5), (4, 3, 5)])
def test_operator_matrix_matches_matrix_free(dims, rng):
    grid = StructuredGrid(dims, (1.0,) * len(dims))
    faces = BoundarySpec.cavity(len(dims), 1.0, 0.0)['T']
    op = LaplacianOperator(grid, faces, coeff=0.5)
    x = rng.standard_normal(grid.n_cells)
    np.testing.assert_allclose(op.matrix @ x, op.apply(x), rtol=1e-13, atol=1e-10)
    np.testing.assert_allclose(op.matrix.diagonal(), op.diagonal().ravel(), rtol=1e-13)
    assert not op.singular


def test_neumann_operator_is_singular_and_symmetric(rng):
    grid = StructuredGrid((6, 6), (1.0, 1.0))
    op = LaplacianOperator(grid, neumann_faces(2))
    assert op.singular
    np.testing.assert_allclose(op.matrix.sum(axis=1), 0.0, atol=1e-10)
    x, y = rng.standard_normal((2, grid.n_cells))
    lhs, rhs = op.apply(x) @ y, x @ op.apply(y)
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)
