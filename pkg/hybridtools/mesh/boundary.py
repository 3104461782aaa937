'''
@File    :  boundary.py
@Desc    :  Wall boundary conditions and the ghost-layer padding that embeds them
            into surrogate inputs. Faces are addressed as (physical axis, side) with
            side 0 the lower wall and side 1 the upper wall of that axis.
'''

from dataclasses import dataclass

import numpy as np

VELOCITY_NAMES = ('u_x', 'u_y', 'u_z')
LO, HI = 0, 1


@dataclass(frozen=True)
class Dirichlet:
    """ Fixed wall value in field units. """
    value: float


@dataclass(frozen=True)
class NeumannZero:
    """ Zero normal gradient at the wall. """


def all_faces(ndim):
    return [(axis, side) for axis in range(ndim) for side in (LO, HI)]


class BoundarySpec:
    """ One condition per wall face for every transported field.

    Args:
        ndim (int): Number of physical axes.
        conditions (dict[str, dict[tuple[int, int], Dirichlet | NeumannZero]]):
            Field name -> face -> condition.
    """

    def __init__(self, ndim, conditions):
        self.ndim = ndim
        self.conditions = {name: dict(faces) for name, faces in conditions.items()}
        self.validate()

    def validate(self):
        faces = set(all_faces(self.ndim))
        for name, field_faces in self.conditions.items():
            missing = faces - set(field_faces)
            assert not missing, f"field '{name}' has no condition on faces {sorted(missing)}"
            extra = set(field_faces) - faces
            assert not extra, f"field '{name}' has conditions on unknown faces {sorted(extra)}"
            for face, cond in field_faces.items():
                assert isinstance(cond, (Dirichlet, NeumannZero)), \
                    f"field '{name}' face {face}: unsupported condition {cond!r}"

    def __getitem__(self, name):
        return self.conditions[name]

    def __contains__(self, name):
        return name in self.conditions

    @property
    def names(self):
        return list(self.conditions)

    @classmethod
    def cavity(cls, ndim, t_hot, t_cold) -> 'BoundarySpec':
        """ Differentially heated cavity.

        No-slip on every wall, hot wall at x = 0, cold wall at x = L, every other
        wall adiabatic. Pressure is zero-gradient everywhere.
        """
        conditions = {}
        for name in VELOCITY_NAMES[:ndim]:
            conditions[name] = {face: Dirichlet(0.0) for face in all_faces(ndim)}
        temperature = {face: NeumannZero() for face in all_faces(ndim)}
        temperature[(0, LO)] = Dirichlet(float(t_hot))
        temperature[(0, HI)] = Dirichlet(float(t_cold))
        conditions['T'] = temperature
        conditions['p'] = {face: NeumannZero() for face in all_faces(ndim)}
        return cls(ndim, conditions)

    def dirichlet_values(self, name):
        """ All Dirichlet values of one field (used for normalization bounds). """
        return [c.value for c in self.conditions[name].values() if isinstance(c, Dirichlet)]


def _wall_slab(ndim, array_axis, index):
    slab = [slice(None)] * ndim
    slab[array_axis] = index
    return tuple(slab)


def pad_with_boundaries(field, faces) -> np.ndarray:
    """ Pad a cell field with one ghost layer per wall.

    The interior is copied with an offset of one. Zero-gradient walls then copy
    the adjacent layer, and fixed-value walls are written last over the full
    extended range, so edges and corners take the fixed value. Within each pass
    the physical axes are visited from the last to the first, i.e. the x walls
    are always written last.

    Args:
        field (np.ndarray): Cell field with physical axes reversed (see StructuredGrid).
        faces (dict): Face -> condition mapping of this field, e.g. `spec['T']`.

    Returns:
        padded (np.ndarray): Field with every extent increased by 2.
    """
    field = np.asarray(field)
    ndim = field.ndim
    assert len(faces) == 2 * ndim, f'{len(faces)} face conditions given for a {ndim}D field'
    padded = np.zeros(tuple(n + 2 for n in field.shape), dtype=np.result_type(field, float))
    padded[(slice(1, -1),) * ndim] = field

    for axis in reversed(range(ndim)):
        a = ndim - 1 - axis
        if isinstance(faces[(axis, LO)], NeumannZero):
            padded[_wall_slab(ndim, a, 0)] = padded[_wall_slab(ndim, a, 1)]
        if isinstance(faces[(axis, HI)], NeumannZero):
            padded[_wall_slab(ndim, a, -1)] = padded[_wall_slab(ndim, a, -2)]

    for axis in reversed(range(ndim)):
        a = ndim - 1 - axis
        lo, hi = faces[(axis, LO)], faces[(axis, HI)]
        if isinstance(lo, Dirichlet):
            padded[_wall_slab(ndim, a, 0)] = lo.value
        if isinstance(hi, Dirichlet):
            padded[_wall_slab(ndim, a, -1)] = hi.value
    return padded
