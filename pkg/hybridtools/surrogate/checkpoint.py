'''
@File    :  checkpoint.py
@Desc    :  Versioned binary model checkpoints.

            Layout (little endian):
              header      CHECKPOINT_HEADER (magic "XRNN", version, kind, ndim, n_vars, meta_len)
              meta        JSON, meta_len bytes: sub-network options and [name, shape] per tensor
              norm stats  float64 (n_vars, 2) min / max per variable
              tensors     float64, state dict order
'''

import json
import os
import os.path as osp

import numpy as np
import torch

from ..exceptions import SnapshotFormatError
from .features import NormStats, variable_names
from .networks import MODEL_KINDS, SurrogateModel

MAGIC = b'XRNN'
VERSION = 1

CHECKPOINT_HEADER = np.dtype([
    ('magic', 'S4'),
    ('version', '<u4'),
    ('kind', 'S8'),
    ('ndim', '<u4'),
    ('n_vars', '<u4'),
    ('meta_len', '<u4'),
])


def save_checkpoint(model: SurrogateModel, path) -> str:
    """ Write a model with its normalization bounds; the file is replaced atomically. """
    state = model.state_dict()
    meta = {
        'options': model.options,
        'tensors': [[name, list(t.shape)] for name, t in state.items()],
    }
    meta_bytes = json.dumps(meta).encode('utf-8')
    header = np.zeros(1, dtype=CHECKPOINT_HEADER)
    header['magic'] = MAGIC
    header['version'] = VERSION
    header['kind'] = model.kind.encode('ascii')
    header['ndim'] = model.ndim
    header['n_vars'] = len(model.names)
    header['meta_len'] = len(meta_bytes)

    partial = f'{path}.partial'
    with open(partial, 'wb') as f:
        f.write(header.tobytes())
        f.write(meta_bytes)
        f.write(model.stats.as_array().astype('<f8').tobytes())
        for t in state.values():
            f.write(t.detach().cpu().numpy().astype('<f8').tobytes())
    os.replace(partial, path)
    return path


def load_checkpoint(path) -> SurrogateModel:
    """ Read a model written by `save_checkpoint`.

    Raises:
        SnapshotFormatError: Wrong magic or version, or a truncated file.
    """
    if not osp.exists(path):
        raise SnapshotFormatError(f'checkpoint {path} does not exist')
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size < CHECKPOINT_HEADER.itemsize:
        raise SnapshotFormatError(f'{path}: truncated header')
    header = np.frombuffer(raw[:CHECKPOINT_HEADER.itemsize].tobytes(), dtype=CHECKPOINT_HEADER)[0]
    if header['magic'] != MAGIC:
        raise SnapshotFormatError(f'{path}: bad magic {header["magic"]!r}, not a model checkpoint')
    if header['version'] != VERSION:
        raise SnapshotFormatError(f'{path}: unsupported checkpoint version {header["version"]}')
    kind = header['kind'].decode('ascii')
    if kind not in MODEL_KINDS:
        raise SnapshotFormatError(f"{path}: unknown model kind '{kind}'")

    ndim, n_vars = int(header['ndim']), int(header['n_vars'])
    offset = CHECKPOINT_HEADER.itemsize
    meta_len = int(header['meta_len'])
    meta = json.loads(raw[offset:offset + meta_len].tobytes().decode('utf-8'))
    offset += meta_len

    payload = np.frombuffer(raw[offset:].tobytes(), dtype='<f8')
    expected = 2 * n_vars + sum(int(np.prod(shape)) for _, shape in meta['tensors'])
    if payload.size != expected:
        raise SnapshotFormatError(f'{path}: expected {expected} values, found {payload.size}')

    names = variable_names(ndim)
    if len(names) != n_vars:
        raise SnapshotFormatError(f'{path}: {n_vars} variables do not match a {ndim}D model')
    stats = NormStats.from_array(names, payload[:2 * n_vars].reshape(n_vars, 2))
    model = SurrogateModel(kind, ndim, stats, **meta['options'])

    cursor = 2 * n_vars
    reference = model.state_dict()
    state = {}
    for name, shape in meta['tensors']:
        count = int(np.prod(shape))
        values = torch.from_numpy(payload[cursor:cursor + count].reshape(shape).copy())
        state[name] = values.to(reference[name].dtype)
        cursor += count
    model.load_state_dict(state)
    model.eval()
    return model
