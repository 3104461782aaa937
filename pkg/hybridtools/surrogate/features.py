'''
@File    :  features.py
@Desc    :  Tiered-stencil inputs of the surrogate. Every cell gets, for each transported
            variable, its own value and the values of its face neighbours read from the
            boundary-padded, min-max normalized field.
'''

from dataclasses import dataclass

import numpy as np

from ..mesh import BoundarySpec, FieldState, pad_with_boundaries, VELOCITY_NAMES

SCALE_FLOOR = 1e-12


def variable_names(ndim) -> tuple:
    """ Transported variables in feature order: velocity components, then T. """
    return tuple(VELOCITY_NAMES[:ndim]) + ('T',)


def stencil_size(ndim) -> int:
    return 2 * ndim + 1


def stencil_offsets(ndim) -> list:
    """ Array offsets of the stencil slots: center, -x, +x, -y, +y[, -z, +z]. """
    offsets = [(0,) * ndim]
    for axis in range(ndim):
        a = ndim - 1 - axis
        for step in (-1, 1):
            off = [0] * ndim
            off[a] = step
            offsets.append(tuple(off))
    return offsets


@dataclass
class NormStats:
    """ Per-variable min-max normalization of states and derivative targets.

    Args:
        names (tuple[str]): Variable names in feature order.
        lo (np.ndarray): Lower bound per variable.
        hi (np.ndarray): Upper bound per variable.
    """
    names: tuple
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        self.names = tuple(self.names)
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        assert self.lo.shape == self.hi.shape == (len(self.names),), 'one bound pair per variable required'

    @property
    def scale(self) -> np.ndarray:
        return np.maximum(self.hi - self.lo, SCALE_FLOOR)

    def index(self, name) -> int:
        return self.names.index(name)

    def normalize(self, name, values):
        i = self.index(name)
        return (values - self.lo[i]) / self.scale[i]

    def denormalize(self, name, values):
        i = self.index(name)
        return values * self.scale[i] + self.lo[i]

    def as_array(self) -> np.ndarray:
        return np.stack([self.lo, self.hi], axis=1)

    @classmethod
    def from_array(cls, names, arr) -> 'NormStats':
        arr = np.asarray(arr, dtype=float)
        return cls(names, arr[:, 0], arr[:, 1])


def fit_norm_stats(snapshots, boundary: BoundarySpec) -> NormStats:
    """ Min-max bounds over the snapshots and the fixed wall values of each variable. """
    ndim = snapshots[0].ndim
    names = variable_names(ndim)
    lo, hi = [], []
    for name in names:
        values = [s.component(name).ravel() for s in snapshots]
        walls = boundary.dirichlet_values(name) if name in boundary else []
        if walls:
            values.append(np.asarray(walls, dtype=float))
        values = np.concatenate(values)
        lo.append(values.min())
        hi.append(values.max())
    return NormStats(names, np.array(lo), np.array(hi))


def build_stencil_features(state: FieldState, boundary: BoundarySpec, stats: NormStats) -> np.ndarray:
    """ Stencil feature matrix of a state.

    Args:
        state (FieldState): State to encode.
        boundary (BoundarySpec): Wall conditions used for the ghost layer.
        stats (NormStats): Normalization bounds.

    Returns:
        features (np.ndarray): Shape (n_cells, V*S) in the C order of the grid shape;
                               column v*S + s is stencil slot s of variable v.
    """
    ndim = state.ndim
    shape = state.T.shape
    offsets = stencil_offsets(ndim)
    columns = []
    for name in stats.names:
        # padding in physical units, normalization is affine
        padded = stats.normalize(name, pad_with_boundaries(state.component(name), boundary[name]))
        for off in offsets:
            window = tuple(slice(1 + o, 1 + o + n) for o, n in zip(off, shape))
            columns.append(padded[window].ravel())
    return np.stack(columns, axis=1)


def derivative_targets(current: FieldState, following: FieldState, stats: NormStats) -> np.ndarray:
    """ Normalized one-step change of every variable, shape (n_cells, V). """
    cols = [(following.component(n) - current.component(n)).ravel() / stats.scale[stats.index(n)]
            for n in stats.names]
    return np.stack(cols, axis=1)


def build_pairs(snapshots, boundary: BoundarySpec, stats: NormStats) -> list:
    """ (features, targets) for every consecutive snapshot pair (k -> k+1). """
    assert len(snapshots) >= 2, f'need at least 2 snapshots to build training pairs, got {len(snapshots)}'
    return [(build_stencil_features(a, boundary, stats), derivative_targets(a, b, stats))
            for a, b in zip(snapshots[:-1], snapshots[1:])]
