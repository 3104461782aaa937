from .grid import StructuredGrid, build_grid
from .boundary import BoundarySpec, Dirichlet, NeumannZero, pad_with_boundaries, VELOCITY_NAMES
from .fields import FieldState, ProbeReading, probe_sample, centerline_probes, zero_flux

__all__ = ['StructuredGrid', 'build_grid', 'BoundarySpec', 'Dirichlet', 'NeumannZero',
           'pad_with_boundaries', 'VELOCITY_NAMES', 'FieldState', 'ProbeReading',
           'probe_sample', 'centerline_probes', 'zero_flux']
