""" Cell-centered field state at one time level and point probes. """

from collections import namedtuple
from dataclasses import dataclass, field, replace

import numpy as np

from .boundary import VELOCITY_NAMES
from .grid import StructuredGrid

ProbeReading = namedtuple('ProbeReading', ['u', 'T'])


@dataclass
class FieldState:
    """ Flow state at one time level.

    Args:
        u (np.ndarray): Cell velocity in m/s with shape (ndim, *grid.shape), component 0 = u_x.
        T (np.ndarray): Cell temperature in K.
        p (np.ndarray): Cell kinematic pressure in m^2/s^2.
        rho (np.ndarray): Cell density in kg/m^3.
        phi (tuple[np.ndarray]): Volumetric face flux in m^3/s, one array per physical axis
                                 with shape `grid.face_shape(axis)`, positive along +axis.
        time (float): Simulation time in s.
        step (int): Global time step index.
    """
    u: np.ndarray
    T: np.ndarray
    p: np.ndarray
    rho: np.ndarray
    phi: tuple
    time: float = 0.0
    step: int = 0
    dt: float = field(default=0.0)

    @property
    def ndim(self) -> int:
        return self.u.shape[0]

    def component(self, name) -> np.ndarray:
        """ Field by variable name ('u_x', 'u_y', 'u_z', 'T', 'p', 'rho'). """
        if name in VELOCITY_NAMES:
            return self.u[VELOCITY_NAMES.index(name)]
        return getattr(self, name)

    def copy(self) -> 'FieldState':
        return replace(self, u=self.u.copy(), T=self.T.copy(), p=self.p.copy(), rho=self.rho.copy(),
                       phi=tuple(f.copy() for f in self.phi))

    def velocity_magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.u ** 2, axis=0))

    def check(self, grid: StructuredGrid) -> None:
        """ Assert that every array matches the grid. """
        assert self.u.shape == (grid.ndim,) + grid.shape, \
            f'velocity shape {self.u.shape} does not match grid {grid.shape}'
        for name in ('T', 'p', 'rho'):
            arr = getattr(self, name)
            assert arr.shape == grid.shape, f'{name} shape {arr.shape} does not match grid {grid.shape}'
        assert len(self.phi) == grid.ndim, f'{len(self.phi)} flux arrays for a {grid.ndim}D grid'
        for axis, flux in enumerate(self.phi):
            assert flux.shape == grid.face_shape(axis), \
                f'flux shape {flux.shape} on axis {axis} does not match {grid.face_shape(axis)}'

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.T)))


def zero_flux(grid: StructuredGrid) -> tuple:
    return tuple(np.zeros(grid.face_shape(axis)) for axis in range(grid.ndim))


def probe_sample(state: FieldState, grid: StructuredGrid, points) -> list:
    """ Sample velocity and temperature at physical points.

    The value of the containing cell is returned, no interpolation.

    Args:
        state (FieldState): State to sample.
        grid (StructuredGrid): Grid of the state.
        points (list): Physical coordinates, one tuple per probe.

    Returns:
        list[ProbeReading]: One (u vector, T) reading per point.

    Raises:
        GridError: A point lies outside the domain.
    """
    readings = []
    for point in points:
        idx = grid.locate(point)
        u = np.array([state.u[(c,) + idx] for c in range(grid.ndim)])
        readings.append(ProbeReading(u=u, T=float(state.T[idx])))
    return readings


def centerline_probes(grid: StructuredGrid, fractions=(0.02, 0.05, 0.08)) -> list:
    """ Six probes on the vertical centerline, three near each horizontal wall. """
    center = [grid.origin[a] + 0.5 * grid.lengths[a] for a in range(grid.ndim)]
    y0, height = grid.origin[1], grid.lengths[1]
    heights = [y0 + height * (1.0 - f) for f in fractions] + [y0 + height * f for f in fractions]
    points = []
    for y in heights:
        point = list(center)
        point[1] = y
        points.append(tuple(point))
    return points
