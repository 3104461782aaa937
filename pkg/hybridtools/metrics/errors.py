'''
@File    :  errors.py
@Desc    :  Field error metrics against a ground-truth trajectory.
'''

import warnings

import numpy as np
import pandas as pd

from ..exceptions import MissingGroundTruthError
from ..mesh import FieldState, VELOCITY_NAMES

METRICS = ('rel_l2', 'mse', 'mae', 'maxae')


def _pair(truth, pred):
    truth = np.asarray(truth, dtype=float)
    pred = np.asarray(pred, dtype=float)
    if truth.shape != pred.shape:
        raise ValueError(f'shape mismatch: truth {truth.shape} vs prediction {pred.shape}')
    return truth, pred


def rel_l2(truth, pred) -> float:
    """ ||Z - Z_hat|| / ||Z||; NaN (with a warning) when the truth has zero norm. """
    truth, pred = _pair(truth, pred)
    norm = np.linalg.norm(truth.ravel())
    if norm == 0.0:
        warnings.warn('relative L2 error undefined for a zero-norm truth field', RuntimeWarning)
        return float('nan')
    return float(np.linalg.norm((truth - pred).ravel()) / norm)


def mse(truth, pred) -> float:
    truth, pred = _pair(truth, pred)
    return float(np.mean((truth - pred) ** 2))


def mae(truth, pred) -> float:
    truth, pred = _pair(truth, pred)
    return float(np.mean(np.abs(truth - pred)))


def maxae(truth, pred) -> float:
    truth, pred = _pair(truth, pred)
    return float(np.max(np.abs(truth - pred)))


_FUNCS = {'rel_l2': rel_l2, 'mse': mse, 'mae': mae, 'maxae': maxae}


def _quantities(state: FieldState) -> dict:
    out = {'T': state.T, 'u_mag': state.velocity_magnitude()}
    for c in range(state.ndim):
        out[VELOCITY_NAMES[c]] = state.u[c]
    return out


def state_errors(truth: FieldState, pred: FieldState) -> dict:
    """ Every metric for T, |u| and each velocity component, keyed 'metric(quantity)'. """
    t_q, p_q = _quantities(truth), _quantities(pred)
    record = {}
    for name in t_q:
        for metric in METRICS:
            record[f'{metric}({name})'] = _FUNCS[metric](t_q[name], p_q[name])
    return record


def error_series(truth, pred) -> pd.DataFrame:
    """ Per-step errors over the steps both trajectories hold.

    Args:
        truth: Trajectory or TrajectoryReader of the reference run.
        pred: Trajectory or TrajectoryReader of the evaluated run.

    Returns:
        pd.DataFrame: One row per common step with `step`, `time` and every metric column.

    Raises:
        MissingGroundTruthError: The trajectories share no step.
    """
    steps = sorted(set(truth.steps) & set(pred.steps))
    if not steps:
        raise MissingGroundTruthError('truth and prediction have no common snapshot step')
    rows = []
    for step in steps:
        t_state, p_state = truth[step], pred[step]
        rows.append({'step': step, 'time': p_state.time, **state_errors(t_state, p_state)})
    return pd.DataFrame(rows)


def time_averaged(series: pd.DataFrame, skip_initial=True) -> pd.Series:
    """ Mean of every metric column, the initial (identical) state excluded. """
    frame = series[series['step'] > series['step'].min()] if skip_initial and len(series) > 1 else series
    return frame.drop(columns=['step', 'time']).mean()
