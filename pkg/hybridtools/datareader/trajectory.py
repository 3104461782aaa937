"""
Run trajectories: an in-memory ring buffer of recent states plus snapshots kept
at a fixed step cadence, optionally persisted as snapshot files of a run directory.
"""

import glob
import os
import os.path as osp
import re
from collections import deque

from ..exceptions import MissingGroundTruthError
from ..mesh import FieldState
from .snapshot_file import read_snapshot, write_snapshot

SNAPSHOT_PATTERN = 'snapshot_*.xrpt'
_STEP_RE = re.compile(r'snapshot_(\d+)\.xrpt$')


def snapshot_name(step) -> str:
    return f'snapshot_{step:06d}.xrpt'


class Trajectory:
    """ States of one run.

    Args:
        run_dir (str, optional): Directory for snapshot files; nothing is written when None.
        cadence (int): Keep (and persist) every `cadence`-th step.
        maxlen (int): Size of the ring buffer of most recent states.
    """

    def __init__(self, run_dir=None, cadence=10, maxlen=32):
        assert cadence >= 1, f'snapshot cadence must be positive, got {cadence}'
        self.run_dir = run_dir
        self.cadence = cadence
        self.recent = deque(maxlen=maxlen)
        self.snapshots = {}
        if run_dir is not None:
            os.makedirs(run_dir, exist_ok=True)

    def path(self, name) -> str:
        assert self.run_dir is not None, 'trajectory has no run directory'
        return osp.join(self.run_dir, name)

    def _keep(self, state: FieldState):
        self.snapshots[state.step] = state
        if self.run_dir is not None:
            write_snapshot(state, self.path(snapshot_name(state.step)))

    def append(self, state: FieldState):
        self.recent.append(state)
        if state.step % self.cadence == 0:
            self._keep(state)

    def extend(self, states):
        for state in states:
            self.append(state)

    def flush(self):
        """ Keep the latest state even when it is off the cadence. """
        if self.recent and self.recent[-1].step not in self.snapshots:
            self._keep(self.recent[-1])

    @property
    def latest(self) -> FieldState:
        return self.recent[-1]

    @property
    def steps(self) -> list:
        return sorted(self.snapshots)

    def __len__(self):
        return len(self.snapshots)

    def __getitem__(self, step) -> FieldState:
        return self.snapshots[step]

    def __iter__(self):
        for step in self.steps:
            yield self.snapshots[step]


class TrajectoryReader:
    """ Snapshot files of a run directory, sorted by step.

    Args:
        run_dir (str): Directory holding `snapshot_<step>.xrpt` files.
        grid (StructuredGrid, optional): Expected grid of every snapshot.
    """

    def __init__(self, run_dir, grid=None):
        if not osp.isdir(run_dir):
            raise MissingGroundTruthError(f'run directory {run_dir} does not exist')
        self.run_dir = run_dir
        self.grid = grid
        self.files = {}
        for path in glob.glob(osp.join(run_dir, SNAPSHOT_PATTERN)):
            match = _STEP_RE.search(osp.basename(path))
            if match:
                self.files[int(match.group(1))] = path
        if not self.files:
            raise MissingGroundTruthError(f'no snapshot files found in {run_dir}')

    @property
    def steps(self) -> list:
        return sorted(self.files)

    def __len__(self):
        return len(self.files)

    def __getitem__(self, step) -> FieldState:
        return read_snapshot(self.files[step], self.grid)

    def __iter__(self):
        for step in self.steps:
            yield self[step]
