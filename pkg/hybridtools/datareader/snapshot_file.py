"""
Binary field snapshots of a run directory.

Layout (little endian):
    header   SNAPSHOT_HEADER: magic "XRPT", version, axis count, extents, roster size, time, dt, step
    roster   ROSTER_ENTRY per field: name, component count, location (0 cell, 1 + axis for faces)
    payload  float64 per field in roster order, row-major in the array layout of the grid
"""

import os
import os.path as osp

import numpy as np

from ..exceptions import SnapshotFormatError
from ..mesh import FieldState, StructuredGrid

MAGIC = b'XRPT'
VERSION = 1
CELL = 0

SNAPSHOT_HEADER = np.dtype([
    ('magic', 'S4'),
    ('version', '<u4'),
    ('ndim', '<u4'),
    ('extents', '<u4', (3,)),
    ('n_fields', '<u4'),
    ('time', '<f8'),
    ('dt', '<f8'),
    ('step', '<u8'),
])

ROSTER_ENTRY = np.dtype([
    ('name', 'S8'),
    ('components', '<u4'),
    ('location', '<u4'),
])

AXIS_LABELS = 'xyz'


def _shape(extents, location):
    """ Array shape of a roster entry (physical axes reversed). """
    dims = list(extents)
    if location != CELL:
        dims[location - 1] += 1
    return tuple(reversed(dims))


def _roster(state: FieldState):
    ndim = state.ndim
    entries = [('u', ndim, CELL, state.u), ('T', 1, CELL, state.T), ('p', 1, CELL, state.p),
               ('rho', 1, CELL, state.rho)]
    for axis in range(ndim):
        entries.append((f'phi_{AXIS_LABELS[axis]}', 1, 1 + axis, state.phi[axis]))
    return entries


def write_snapshot(state: FieldState, path) -> str:
    """ Write a state; the file appears under `path` only once it is complete. """
    extents = list(reversed(state.T.shape))
    header = np.zeros(1, dtype=SNAPSHOT_HEADER)
    header['magic'] = MAGIC
    header['version'] = VERSION
    header['ndim'] = len(extents)
    header['extents'][0, :len(extents)] = extents
    entries = _roster(state)
    header['n_fields'] = len(entries)
    header['time'] = state.time
    header['dt'] = state.dt
    header['step'] = state.step

    roster = np.zeros(len(entries), dtype=ROSTER_ENTRY)
    for i, (name, comps, loc, _) in enumerate(entries):
        roster[i] = (name.encode('ascii'), comps, loc)

    partial = f'{path}.partial'
    with open(partial, 'wb') as f:
        f.write(header.tobytes())
        f.write(roster.tobytes())
        for _, _, _, arr in entries:
            f.write(np.ascontiguousarray(arr, dtype='<f8').tobytes())
    os.replace(partial, path)
    return path


def read_snapshot(path, grid: StructuredGrid = None) -> FieldState:
    """ Read a state written by `write_snapshot`.

    Args:
        path (str): Snapshot file.
        grid (StructuredGrid, optional): Expected grid; extents must match.

    Raises:
        SnapshotFormatError: Missing or truncated file, wrong magic or version,
                             or extents that do not match `grid`.
    """
    if not osp.exists(path):
        raise SnapshotFormatError(f'snapshot {path} does not exist')
    size = osp.getsize(path)
    if size < SNAPSHOT_HEADER.itemsize:
        raise SnapshotFormatError(f'{path}: truncated header')
    header = np.fromfile(path, dtype=SNAPSHOT_HEADER, count=1)[0]
    if header['magic'] != MAGIC:
        raise SnapshotFormatError(f'{path}: bad magic {header["magic"]!r}, not a snapshot file')
    if header['version'] != VERSION:
        raise SnapshotFormatError(f'{path}: unsupported snapshot version {header["version"]}')
    ndim = int(header['ndim'])
    if ndim not in (2, 3):
        raise SnapshotFormatError(f'{path}: invalid axis count {ndim}')
    extents = tuple(int(n) for n in header['extents'][:ndim])
    if grid is not None and extents != grid.dims:
        raise SnapshotFormatError(f'{path}: extents {extents} do not match grid {grid.dims}')

    n_fields = int(header['n_fields'])
    offset = SNAPSHOT_HEADER.itemsize
    if size < offset + n_fields * ROSTER_ENTRY.itemsize:
        raise SnapshotFormatError(f'{path}: truncated roster')
    roster = np.fromfile(path, dtype=ROSTER_ENTRY, count=n_fields, offset=offset)
    offset += n_fields * ROSTER_ENTRY.itemsize

    counts = [int(e['components']) * int(np.prod(_shape(extents, int(e['location'])))) for e in roster]
    if size != offset + 8 * sum(counts):
        raise SnapshotFormatError(f'{path}: payload has {size - offset} bytes, expected {8 * sum(counts)}')
    payload = np.fromfile(path, dtype='<f8', count=sum(counts), offset=offset)

    fields, phi = {}, {}
    cursor = 0
    for entry, count in zip(roster, counts):
        name = entry['name'].decode('ascii')
        shape = _shape(extents, int(entry['location']))
        comps = int(entry['components'])
        arr = payload[cursor:cursor + count].reshape((comps,) + shape if comps > 1 else shape).astype(float)
        cursor += count
        if name.startswith('phi_'):
            phi[AXIS_LABELS.index(name[-1])] = arr
        else:
            fields[name] = arr
    missing = {'u', 'T', 'p', 'rho'} - set(fields)
    if missing or len(phi) != ndim:
        raise SnapshotFormatError(f'{path}: roster is missing fields {sorted(missing) or "phi"}')
    u = fields['u'].reshape((ndim,) + _shape(extents, CELL))
    return FieldState(u=u, T=fields['T'], p=fields['p'], rho=fields['rho'],
                      phi=tuple(phi[a] for a in range(ndim)),
                      time=float(header['time']), step=int(header['step']), dt=float(header['dt']))
