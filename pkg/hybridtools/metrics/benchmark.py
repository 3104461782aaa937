'''
@File    :  benchmark.py
@Desc    :  Benchmark harness: solver-only reference runs, threshold / epoch sweeps,
            architecture comparison and probe time series, all as DataFrames.
'''

import time
from concurrent.futures import ProcessPoolExecutor, as_completed

import pandas as pd

from .._logging import get_logger
from ..datareader import Trajectory
from ..exceptions import MissingGroundTruthError
from ..hybrid import LEDGER_COLUMNS, hybrid_run, rollout_statistics
from ..mesh import StructuredGrid, build_grid, centerline_probes, probe_sample
from ..solver import BoussinesqSolver
from .errors import error_series, time_averaged

logger = get_logger(__name__)

SWEEP_COLUMNS = ['Epochs', 'Res.'] + LEDGER_COLUMNS + [
    'L2(T)', 'MSE(T)', 'MAE(T)', 'MaxAE(T)', 'L2(U)', 'MSE(U)', 'MAE(U)', 'MaxAE(U)']

# sweep column -> error_series column
_ERROR_COLUMNS = {
    'L2(T)': 'rel_l2(T)', 'MSE(T)': 'mse(T)', 'MAE(T)': 'mae(T)', 'MaxAE(T)': 'maxae(T)',
    'L2(U)': 'rel_l2(u_mag)', 'MSE(U)': 'mse(u_mag)', 'MAE(U)': 'mae(u_mag)', 'MaxAE(U)': 'maxae(u_mag)',
}


def cfd_reference_run(case, trajectory: Trajectory = None, n_steps=None) -> Trajectory:
    """ Solver-only run from the hybrid initial state, the ground truth of the error series. """
    grid = build_grid(case)
    solver = BoussinesqSolver(grid, case.boundary_spec(), case.physics_params(), case.pcg_settings())
    n_steps = case.total_steps if n_steps is None else n_steps
    if trajectory is None:
        trajectory = Trajectory(None, cadence=case.snapshot_cadence)
    state = solver.initial_state()
    trajectory.append(state)
    tic = time.perf_counter()
    for _ in range(n_steps):
        state = solver.cfd_step(state)
        trajectory.append(state)
    trajectory.flush()
    logger.info(f'reference run: {n_steps} steps in {time.perf_counter() - tic:.2f} s')
    return trajectory


def _error_summary(truth, trajectory) -> dict:
    means = time_averaged(error_series(truth, trajectory))
    return {col: means[src] for col, src in _ERROR_COLUMNS.items()}


def _sweep_row(case, epochs, threshold, truth) -> dict:
    run = case.replace(tl_epochs=epochs, residual_threshold=threshold)
    result = hybrid_run(run, trajectory=Trajectory(None, cadence=run.snapshot_cadence))
    row = {'Epochs': epochs, 'Res.': threshold}
    row.update(result.ledger.summary(run.total_steps))
    row.update(_error_summary(truth, result.trajectory))
    row['aborted'] = result.ledger.aborted
    return row


def benchmark_sweep(case, epochs_grid, thresholds, truth=None, workers=1) -> pd.DataFrame:
    """ One hybrid run per (tl_epochs, residual_threshold) pair with ledger and mean errors.

    Args:
        case (BaseConfig): Base case; epochs and threshold are overridden per run.
        epochs_grid (list[int]): Transfer-learning epochs per cycle.
        thresholds (list[float]): Residual thresholds.
        truth (Trajectory, optional): Solver-only trajectory; computed when omitted.
        workers (int): Parallel processes. Wall-clock buckets are only comparable with 1.

    Returns:
        pd.DataFrame: One row per combination in grid order, `SWEEP_COLUMNS` first.

    Raises:
        MissingGroundTruthError: `truth` holds no step in common with the runs.
    """
    if truth is None:
        truth = cfd_reference_run(case)
    if len(truth) == 0:
        raise MissingGroundTruthError('ground-truth trajectory is empty')
    combos = [(e, r) for e in epochs_grid for r in thresholds]
    rows = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(_sweep_row, case, e, r, truth): (e, r) for e, r in combos}
            for future in as_completed(futures):
                rows[futures[future]] = future.result()
    else:
        for e, r in combos:
            logger.info(f'sweep: epochs {e}, threshold {r}')
            rows[(e, r)] = _sweep_row(case, e, r, truth)
    frame = pd.DataFrame([rows[c] for c in combos])
    return frame[SWEEP_COLUMNS + ['aborted']]


def architecture_benchmark(case, kinds=('FVMN', 'FVFNO'), truth=None) -> pd.DataFrame:
    """ Same case and seed for every model kind; ledger, adaptivity and mean errors per kind. """
    if truth is None:
        truth = cfd_reference_run(case)
    rows = []
    for kind in kinds:
        run = case.replace(kind=kind)
        result = hybrid_run(run, trajectory=Trajectory(None, cadence=run.snapshot_cadence))
        row = {'model': kind}
        row.update(result.ledger.summary(run.total_steps))
        stats = rollout_statistics(result.ledger, run.total_steps)
        row['Steps/switch first quarter'] = stats['first_quarter']
        row['Steps/switch last quarter'] = stats['last_quarter']
        row.update(_error_summary(truth, result.trajectory))
        row['aborted'] = result.ledger.aborted
        rows.append(row)
    return pd.DataFrame(rows)


def probe_series(trajectory, grid: StructuredGrid, points=None) -> pd.DataFrame:
    """ Probe readings of every stored state, one row per (step, probe). """
    points = centerline_probes(grid) if points is None else points
    labels = 'xyz'[:grid.ndim]
    rows = []
    for state in trajectory:
        for i, (point, reading) in enumerate(zip(points, probe_sample(state, grid, points))):
            row = {'step': state.step, 'time': state.time, 'probe': i}
            row.update({label: coord for label, coord in zip(labels, point)})
            row.update({f'u_{label}': reading.u[c] for c, label in enumerate(labels)})
            row['T'] = reading.T
            rows.append(row)
    return pd.DataFrame(rows)
