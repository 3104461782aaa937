'''
@File    :  grid.py
@Desc    :  Uniform Cartesian cell grid shared by the solver, the surrogate and the metrics.
            Arrays are stored with the physical axes reversed, i.e. a 2D field has
            shape (ny, nx) and a 3D field (nz, ny, nx), so that the x axis is the
            last (fastest) array axis.
'''

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import GridError

MIN_EXTENT = 3


@dataclass(frozen=True)
class StructuredGrid:
    """ Uniform structured grid with 2 or 3 physical axes.

    Args:
        dims (tuple[int]): Number of cells per physical axis (x, y[, z]).
        lengths (tuple[float]): Domain length per physical axis in meters.
        origin (tuple[float]): Coordinates of the lower domain corner in meters.
    """
    dims: tuple
    lengths: tuple
    origin: tuple = field(default=None)

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        lengths = tuple(float(length) for length in self.lengths)
        origin = (0.0,) * len(dims) if self.origin is None else tuple(float(o) for o in self.origin)
        if len(dims) not in (2, 3):
            raise GridError(f'only 2D and 3D grids are supported, got {len(dims)} axes')
        if len(lengths) != len(dims) or len(origin) != len(dims):
            raise GridError('dims, lengths and origin must have the same number of axes')
        if any(n < MIN_EXTENT for n in dims):
            raise GridError(f'every extent must be at least {MIN_EXTENT}, got {dims}')
        if any(not np.isfinite(length) or length <= 0 for length in lengths):
            raise GridError(f'domain lengths must be positive, got {lengths}')
        object.__setattr__(self, 'dims', dims)
        object.__setattr__(self, 'lengths', lengths)
        object.__setattr__(self, 'origin', origin)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def spacing(self) -> tuple:
        return tuple(length / n for length, n in zip(self.lengths, self.dims))

    @property
    def shape(self) -> tuple:
        """ Array shape of a cell field (physical axes reversed). """
        return tuple(reversed(self.dims))

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.dims))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def array_axis(self, axis: int) -> int:
        """ Array axis that holds physical axis `axis` (0 = x). """
        return self.ndim - 1 - axis

    def face_area(self, axis: int) -> float:
        """ Area of a face normal to physical axis `axis`. """
        return self.cell_volume / self.spacing[axis]

    def face_shape(self, axis: int) -> tuple:
        """ Array shape of the face field normal to physical axis `axis`, boundary faces included. """
        shape = list(self.shape)
        shape[self.array_axis(axis)] += 1
        return tuple(shape)

    def centers(self, axis: int) -> np.ndarray:
        """ 1D cell-center coordinates along physical axis `axis`. """
        h = self.spacing[axis]
        return self.origin[axis] + h * (np.arange(self.dims[axis]) + 0.5)

    def faces(self, axis: int) -> np.ndarray:
        """ 1D face coordinates along physical axis `axis`, both walls included. """
        return self.origin[axis] + self.spacing[axis] * np.arange(self.dims[axis] + 1)

    def mesh(self) -> list:
        """ Cell-center coordinate arrays, one per physical axis, each of `shape`. """
        coords = [self.centers(axis) for axis in reversed(range(self.ndim))]
        grids = np.meshgrid(*coords, indexing='ij')
        return list(reversed(grids))

    def locate(self, point) -> tuple:
        """ Array index of the cell containing `point` (nearest cell center).

        Raises:
            GridError: The point lies outside the closed domain.
        """
        point = np.asarray(point, dtype=float).ravel()
        if point.size != self.ndim:
            raise GridError(f'point {tuple(point)} does not have {self.ndim} coordinates')
        index = []
        for axis in range(self.ndim):
            lo = self.origin[axis]
            hi = lo + self.lengths[axis]
            if not lo <= point[axis] <= hi:
                raise GridError(f'point {tuple(point)} is outside the domain on axis {axis}')
            i = int(np.floor((point[axis] - lo) / self.spacing[axis]))
            index.append(min(max(i, 0), self.dims[axis] - 1))
        return tuple(reversed(index))


def build_grid(config) -> StructuredGrid:
    """ Build the case grid from a configuration object.

    Args:
        config: Any object with `extents` and `lengths` attributes (and optionally `origin`),
                typically a `BaseConfig`.

    Returns:
        StructuredGrid: Grid with spacing = length / extent per axis.
    """
    origin = getattr(config, 'origin', None)
    return StructuredGrid(tuple(config.extents), tuple(config.lengths), origin)
