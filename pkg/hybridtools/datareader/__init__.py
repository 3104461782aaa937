from .snapshot_file import read_snapshot, write_snapshot, SNAPSHOT_HEADER, ROSTER_ENTRY
from .trajectory import Trajectory, TrajectoryReader, snapshot_name


__all__ = ['read_snapshot', 'write_snapshot', 'SNAPSHOT_HEADER', 'ROSTER_ENTRY',
           'Trajectory', 'TrajectoryReader', 'snapshot_name']
