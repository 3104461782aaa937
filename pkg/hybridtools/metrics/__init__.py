from .errors import METRICS, error_series, mae, maxae, mse, rel_l2, state_errors, time_averaged
from .benchmark import (SWEEP_COLUMNS, architecture_benchmark, benchmark_sweep, cfd_reference_run,
                        probe_series)

__all__ = [
    'METRICS', 'error_series', 'mae', 'maxae', 'mse', 'rel_l2', 'state_errors', 'time_averaged',
    'SWEEP_COLUMNS', 'architecture_benchmark', 'benchmark_sweep', 'cfd_reference_run', 'probe_series',
]
