'''
@File    :  operators.py
@Desc    :  Finite-volume operators on a uniform collocated grid: face flux, divergence,
            Gauss-linear gradient, upwind convection and the 5/7-point Laplacian.
            Face arrays include both boundary faces; a flux is positive along +axis.
@TODO    :  None
'''

from functools import cached_property

import numpy as np
import scipy.sparse as sps

from ..mesh.boundary import Dirichlet, NeumannZero, LO, HI, all_faces
from ..mesh.grid import StructuredGrid


def neumann_faces(ndim) -> dict:
    """ Zero-gradient closure on every wall (pure-Neumann pressure problem). """
    return {face: NeumannZero() for face in all_faces(ndim)}


def _take(arr, array_axis, index):
    sl = [slice(None)] * arr.ndim
    sl[array_axis] = index
    return arr[tuple(sl)]


def _boundary_value(cond, cell_layer):
    """ Wall value seen from the adjacent cell layer. """
    if isinstance(cond, Dirichlet):
        return np.full_like(cell_layer, cond.value, dtype=float)
    return cell_layer


def face_values(grid: StructuredGrid, scalar, axis, faces) -> np.ndarray:
    """ Linear interpolation of a cell field to the faces normal to `axis`.

    Boundary faces take the Dirichlet value or, for zero-gradient walls, the
    adjacent cell value.
    """
    a = grid.array_axis(axis)
    interior = 0.5 * (_take(scalar, a, slice(None, -1)) + _take(scalar, a, slice(1, None)))
    lo = _boundary_value(faces[(axis, LO)], _take(scalar, a, slice(0, 1)))
    hi = _boundary_value(faces[(axis, HI)], _take(scalar, a, slice(-1, None)))
    return np.concatenate([lo, interior, hi], axis=a)


def face_flux(grid: StructuredGrid, u, rho=None) -> tuple:
    """ Volumetric (or mass, if `rho` is given) flux through every face.

    Interior faces use the linear interpolation of the adjacent cell velocities
    dotted with the face normal times the face area; walls are no-slip, so
    boundary fluxes are zero.

    Args:
        grid (StructuredGrid): Case grid.
        u (np.ndarray): Cell velocity with shape (ndim, *grid.shape).
        rho (np.ndarray, optional): Cell density; the face density is the arithmetic mean.

    Returns:
        tuple[np.ndarray]: One flux array per physical axis with shape `grid.face_shape(axis)`.
    """
    phi = []
    for axis in range(grid.ndim):
        a = grid.array_axis(axis)
        un = u[axis]
        if rho is not None:
            un = un * rho
        flux = np.zeros(grid.face_shape(axis))
        inner = [slice(None)] * grid.ndim
        inner[a] = slice(1, -1)
        flux[tuple(inner)] = 0.5 * (_take(un, a, slice(None, -1)) + _take(un, a, slice(1, None))) \
            * grid.face_area(axis)
        phi.append(flux)
    return tuple(phi)


def divergence(grid: StructuredGrid, phi) -> np.ndarray:
    """ Net outward face flux of every cell divided by the cell volume (1/s). """
    div = np.zeros(grid.shape)
    for axis in range(grid.ndim):
        div += np.diff(phi[axis], axis=grid.array_axis(axis))
    return div / grid.cell_volume


def gradient(grid: StructuredGrid, scalar, faces) -> np.ndarray:
    """ Gauss-linear cell gradient, shape (ndim, *grid.shape). """
    grad = np.empty((grid.ndim,) + grid.shape)
    for axis in range(grid.ndim):
        fv = face_values(grid, scalar, axis, faces)
        grad[axis] = np.diff(fv, axis=grid.array_axis(axis)) / grid.spacing[axis]
    return grad


def upwind_convect(grid: StructuredGrid, phi, scalar, faces=None) -> np.ndarray:
    """ Upwind discretisation of div(phi * scalar) per unit volume.

    The face value comes from the upwind cell by the sign of the flux. On the
    walls an inflow takes the boundary value and an outflow the cell value;
    without `faces` the cell value is used on both.
    """
    out = np.zeros(grid.shape)
    for axis in range(grid.ndim):
        a = grid.array_axis(axis)
        left = _take(scalar, a, slice(None, -1))
        right = _take(scalar, a, slice(1, None))
        flux = phi[axis]
        f_in = _take(flux, a, slice(1, -1))
        interior = np.where(f_in >= 0.0, left, right) * f_in

        first = _take(scalar, a, slice(0, 1))
        last = _take(scalar, a, slice(-1, None))
        f_lo = _take(flux, a, slice(0, 1))
        f_hi = _take(flux, a, slice(-1, None))
        if faces is None:
            b_lo, b_hi = first, last
        else:
            b_lo = _boundary_value(faces[(axis, LO)], first)
            b_hi = _boundary_value(faces[(axis, HI)], last)
        lo = np.where(f_lo >= 0.0, b_lo, first) * f_lo
        hi = np.where(f_hi >= 0.0, last, b_hi) * f_hi
        face_term = np.concatenate([lo, interior, hi], axis=a)
        out += np.diff(face_term, axis=a)
    return out / grid.cell_volume


def _ghosts(cond, cell_layer, homogeneous):
    if isinstance(cond, Dirichlet):
        wall = 0.0 if homogeneous else cond.value
        return 2.0 * wall - cell_layer
    return cell_layer


def laplacian_apply(grid: StructuredGrid, scalar, coeff, faces, homogeneous=False) -> np.ndarray:
    """ Second-order Laplacian of a cell field scaled by `coeff`.

    Fixed-value walls use the ghost value 2*wall - interior, zero-gradient walls
    drop the face term. With `homogeneous=True` every wall value is taken as
    zero, which gives the linear part of the operator.
    """
    lap = np.zeros(grid.shape)
    for axis in range(grid.ndim):
        a = grid.array_axis(axis)
        lo = _ghosts(faces[(axis, LO)], _take(scalar, a, slice(0, 1)), homogeneous)
        hi = _ghosts(faces[(axis, HI)], _take(scalar, a, slice(-1, None)), homogeneous)
        ext = np.concatenate([lo, scalar, hi], axis=a)
        second = _take(ext, a, slice(2, None)) - 2.0 * scalar + _take(ext, a, slice(None, -2))
        lap += second / grid.spacing[axis] ** 2
    return coeff * lap


def face_gradient_flux(grid: StructuredGrid, scalar, faces) -> tuple:
    """ Compact face-normal gradient times face area, per physical axis.

    `divergence(face_gradient_flux(s))` equals `laplacian_apply(s, 1, faces)`
    exactly, which makes flux projections discretely divergence free.
    """
    fluxes = []
    for axis in range(grid.ndim):
        a = grid.array_axis(axis)
        h = grid.spacing[axis]
        interior = np.diff(scalar, axis=a) / h
        first = _take(scalar, a, slice(0, 1))
        last = _take(scalar, a, slice(-1, None))
        lo_cond, hi_cond = faces[(axis, LO)], faces[(axis, HI)]
        lo = 2.0 * (first - lo_cond.value) / h if isinstance(lo_cond, Dirichlet) else np.zeros_like(first)
        hi = 2.0 * (hi_cond.value - last) / h if isinstance(hi_cond, Dirichlet) else np.zeros_like(last)
        fluxes.append(np.concatenate([lo, interior, hi], axis=a) * grid.face_area(axis))
    return tuple(fluxes)


def _second_difference_1d(n, h, lo_cond, hi_cond):
    main = -2.0 * np.ones(n)
    off = np.ones(n - 1)
    main[0] += 1.0 if isinstance(lo_cond, NeumannZero) else -1.0
    main[-1] += 1.0 if isinstance(hi_cond, NeumannZero) else -1.0
    return sps.diags([off, main, off], [-1, 0, 1], format='csr') / (h * h)


class LaplacianOperator:
    """ Linear part of the Laplacian with fixed wall closures.

    Args:
        grid (StructuredGrid): Case grid.
        faces (dict): Face -> condition; Dirichlet values are ignored (homogeneous operator).
        coeff (float): Diffusivity multiplying the operator.

    `preconditioners` holds the factors built by `pcg_solve`, one per kind.
    """

    def __init__(self, grid: StructuredGrid, faces, coeff=1.0):
        self.grid = grid
        self.faces = faces
        self.coeff = coeff
        self.preconditioners = {}

    @property
    def shape(self):
        return (self.grid.n_cells, self.grid.n_cells)

    @property
    def singular(self) -> bool:
        """ True for the pure-Neumann operator, whose null space are the constants. """
        return all(isinstance(c, NeumannZero) for c in self.faces.values())

    def apply(self, x) -> np.ndarray:
        """ Matrix-free application; accepts a flat or grid-shaped array. """
        x = np.asarray(x, dtype=float)
        flat = x.ndim == 1
        field = x.reshape(self.grid.shape)
        out = laplacian_apply(self.grid, field, self.coeff, self.faces, homogeneous=True)
        return out.ravel() if flat else out

    def diagonal(self) -> np.ndarray:
        diag = np.zeros(self.grid.shape)
        for axis in range(self.grid.ndim):
            a = self.grid.array_axis(axis)
            n = self.grid.dims[axis]
            h2 = self.grid.spacing[axis] ** 2
            d1 = -2.0 * np.ones(n)
            d1[0] += 1.0 if isinstance(self.faces[(axis, LO)], NeumannZero) else -1.0
            d1[-1] += 1.0 if isinstance(self.faces[(axis, HI)], NeumannZero) else -1.0
            shape = [1] * self.grid.ndim
            shape[a] = n
            diag = diag + d1.reshape(shape) / h2
        return self.coeff * diag

    @cached_property
    def matrix(self) -> sps.csr_matrix:
        """ Assembled sparse matrix in the C-order flattening of `grid.shape`. """
        grid = self.grid
        sizes = grid.shape
        total = None
        for axis in range(grid.ndim):
            a = grid.array_axis(axis)
            d1 = _second_difference_1d(grid.dims[axis], grid.spacing[axis],
                                       self.faces[(axis, LO)], self.faces[(axis, HI)])
            term = None
            for k, n in enumerate(sizes):
                block = d1 if k == a else sps.identity(n, format='csr')
                term = block if term is None else sps.kron(term, block, format='csr')
            total = term if total is None else total + term
        return (self.coeff * total).tocsr()
