import math
import os.path as osp

import numpy as np
import pytest
import torch

from hybridtools.datareader import Trajectory
from hybridtools.exceptions import ConfigError, SurrogateDivergenceError
from hybridtools.fvm import LaplacianOperator, face_flux, gradient, neumann_faces
from hybridtools.hybrid import (HybridConfig, HybridLedger, density_from_state, flux_correct, hybrid_run,
                                ml_only_rollout, ml_rollout, relative_residual, transfer_learn_cycle)
from hybridtools.hybrid import orchestrator
from hybridtools.mesh import BoundarySpec, StructuredGrid
from hybridtools.solver import MassResidual, compute_mass_residual, flux_residual
from hybridtools.surrogate import SurrogateModel, fit_norm_stats

from test_features import make_state
from test_networks import zero_derivative_model


def config(threshold=5.0, **kw):
    return HybridConfig(residual_threshold=threshold, total_steps=kw.pop('total_steps', 20), **kw)


def test_relative_residual():
    assert relative_residual(MassResidual(2e-6), MassResidual(2e-6)) == (1.0, False)
    r, degenerate = relative_residual(MassResidual(2e-5), MassResidual(2e-6))
    assert r == pytest.approx(10.0) and r > 5.0 and not degenerate
    r, degenerate = relative_residual(MassResidual(1e-29), MassResidual(0.0))
    assert degenerate and r == pytest.approx(10.0)


@pytest.mark.parametrize('kwargs, key', [
    (dict(threshold=1.0), 'residual_threshold'),
    (dict(tl_buffer=1), 'tl_buffer'),
    (dict(burst_len=2), 'burst_len'),
    (dict(reference_mode='Sometimes'), 'reference_mode'),
    (dict(total_steps=5), 'total_steps'),
])
def test_hybrid_config_validation(kwargs, key):
    with pytest.raises(ConfigError) as err:
        config(**kwargs)
    assert err.value.key == key


def test_density_from_state(grid):
    state = make_state(grid, T=300.0)
    rho = density_from_state(state, np.full(grid.shape, 101325.0))
    np.testing.assert_allclose(rho, 101325 * 0.02896 / (8.314 * 300))
    assert np.ptp(rho) == 0.0
    state.T *= 2
    np.testing.assert_allclose(density_from_state(state, 101325.0), 0.5 * rho)
    state.T[0, 0] = -1.0
    with pytest.raises(SurrogateDivergenceError):
        density_from_state(state, 101325.0)


def test_flux_correct_of_rest_state(grid):
    corrected = flux_correct(make_state(grid), grid)
    assert corrected.projected
    assert not corrected.state.u.any()
    assert all(not f.any() for f in corrected.state.phi)


def test_flux_correct_removes_potential_flow():
    grid = StructuredGrid((32, 32), (1.0, 1.0))
    x, y = grid.mesh()
    state = make_state(grid)
    state.u = gradient(grid, np.cos(np.pi * x) * np.cos(np.pi * y), neumann_faces(2))
    before = face_flux(grid, state.u)
    corrected = flux_correct(state, grid)
    assert corrected.projected
    peak = max(np.abs(f).max() for f in before)
    assert max(np.abs(f).max() for f in corrected.state.phi) <= 0.05 * peak


def test_flux_correct_reduces_residual(grid, rng):
    state = make_state(grid)
    state.u = 1e-3 * rng.standard_normal(state.u.shape)
    corrected = flux_correct(state, grid)
    assert corrected.residual_before == pytest.approx(compute_mass_residual(state, grid).value)
    assert corrected.residual_after == flux_residual(corrected.state.phi, grid)
    assert corrected.residual_before >= 1e6 * corrected.residual_after


def test_unbounded_threshold_runs_to_budget(burst, cavity, grid):
    model = zero_derivative_model(fit_norm_stats(burst, cavity))
    ledger = HybridLedger()
    trajectory = Trajectory(None, cadence=1)
    state = burst[-1]
    reference = compute_mass_residual(state, grid)
    rollout = ml_rollout(model, state, grid, cavity, config(math.inf), reference, ledger, budget=4,
                         trajectory=trajectory)
    assert rollout.steps == 4 and not rollout.switched
    assert rollout.state.step == state.step + 4
    assert trajectory.steps == [state.step + k for k in range(1, 5)]
    assert ledger.n_ML == 4 and ledger.n_switch == 0
    assert [r for _, r in rollout.trace] == [1.0] * 4


def test_rollout_stops_above_threshold(burst, cavity, grid):
    model = zero_derivative_model(fit_norm_stats(burst, cavity))
    state = burst[-1]
    reference = MassResidual(compute_mass_residual(state, grid).value / 10)
    ledger = HybridLedger()
    rollout = ml_rollout(model, state, grid, cavity, config(5.0), reference, ledger)
    assert rollout.switched and not rollout.forced
    assert rollout.steps == 0 and rollout.state is state
    assert rollout.trace[0][1] == pytest.approx(10.0)
    assert ledger.residual_trace == [(state.step + 1, pytest.approx(10.0), False)]


def test_non_finite_prediction_forces_a_switch(burst, cavity, grid):
    model = zero_derivative_model(fit_norm_stats(burst, cavity))
    with torch.no_grad():
        model.subnets['u_x'].head.bias.fill_(float('inf'))
    state = burst[-1]
    rollout = ml_rollout(model, state, grid, cavity, config(5.0), compute_mass_residual(state, grid))
    assert rollout.switched and rollout.forced
    assert math.isnan(rollout.trace[0][1])


def test_ml_only_rollout(burst, cavity, grid):
    model = zero_derivative_model(fit_norm_stats(burst, cavity))
    state = burst[-1]
    final, r_rel = ml_only_rollout(model, state, grid, cavity, compute_mass_residual(state, grid), 3)
    assert final.step == state.step + 3
    np.testing.assert_allclose(r_rel, 1.0)


def test_transfer_learning_keeps_first_layers(burst, cavity):
    model = SurrogateModel('FVMN', 2, fit_norm_stats(burst, cavity), hidden=8, n_hidden=2)
    first = [layer.weight.detach().clone() for layer in model.first_layers()]
    ledger = HybridLedger()
    result = transfer_learn_cycle(model, burst, cavity, config(5.0, tl_epochs=2), ledger)
    assert result.n_pairs == 2 and result.epochs == 2
    assert ledger.time_up == pytest.approx(result.elapsed)
    for layer, w in zip(model.first_layers(), first):
        assert torch.equal(layer.weight, w)


def test_transfer_learning_without_epochs(burst, cavity):
    model = SurrogateModel('FVMN', 2, fit_norm_stats(burst, cavity), hidden=8, n_hidden=2)
    before = {k: v.clone() for k, v in model.state_dict().items()}
    transfer_learn_cycle(model, burst, cavity, config(5.0, tl_epochs=0))
    assert all(torch.equal(v, before[k]) for k, v in model.state_dict().items())


def test_hybrid_run_ledger(tiny_case_file):
    _, case = tiny_case_file(total_steps=30)
    result = hybrid_run(case)
    ledger = result.ledger
    assert ledger.aborted is None
    assert ledger.completed_steps == 30
    assert ledger.n_CFD >= case.initial_steps
    assert len(ledger.rollout_lengths) == ledger.n_switch
    assert np.all(ledger.accepted_residuals() <= case.residual_threshold)
    assert ledger.n_switch == 0 or ledger.time_up > 0
    assert ledger.time_initial_training > 0
    assert result.trajectory.steps[0] == 0 and result.trajectory.steps[-1] == 30
    assert all(s % case.snapshot_cadence == 0 for s in result.trajectory.steps)
    assert osp.exists(result.trajectory.path('snapshot_000000.xrpt'))


def test_hybrid_run_with_perfect_pretrained_model(tiny_case_file, cavity, grid):
    _, case = tiny_case_file(total_steps=20, residual_threshold=1e30)
    state = make_state(grid, T=0.5 * (case.t_hot + case.t_cold))
    model = zero_derivative_model(fit_norm_stats([state], cavity))
    result = hybrid_run(case, model=model, trajectory=Trajectory(None, cadence=5))
    ledger = result.ledger
    assert ledger.aborted is None
    assert ledger.n_CFD == case.initial_steps
    assert ledger.n_switch == 0 and ledger.final_rollout == 20 - case.initial_steps
    assert ledger.time_initial_training == 0.0


def test_hybrid_run_rejects_mismatched_model(tiny_case_file):
    _, case = tiny_case_file()
    cube = StructuredGrid((3, 3, 3), (1.0, 1.0, 1.0))
    stats = fit_norm_stats([make_state(cube)], BoundarySpec.cavity(3, 307.75, 288.15))
    model = SurrogateModel('FVMN', 3, stats, hidden=4, n_hidden=1)
    result = hybrid_run(case, model=model, trajectory=Trajectory(None))
    assert result.ledger.aborted.startswith('ConfigError')


def test_flux_correct_reuses_the_operator(grid, rng):
    op = LaplacianOperator(grid, neumann_faces(2))
    for _ in range(2):
        state = make_state(grid)
        state.u = 1e-3 * rng.standard_normal(state.u.shape)
        corrected = flux_correct(state, grid, op=op)
        assert corrected.projected
        assert corrected.residual_before >= 1e6 * corrected.residual_after
    assert list(op.preconditioners) == ['ic']


def test_flux_correct_needs_the_zero_gradient_operator(grid, cavity):
    with pytest.raises(AssertionError, match='zero-gradient'):
        flux_correct(make_state(grid), grid, op=LaplacianOperator(grid, cavity['T']))


def test_batch_size_reaches_every_training(tiny_case_file, monkeypatch):
    _, case = tiny_case_file(total_steps=30, batch_size=16)
    calls = []
    original = orchestrator.train

    def recording(*args, **kwargs):
        calls.append(kwargs)
        return original(*args, **kwargs)

    monkeypatch.setattr(orchestrator, 'train', recording)
    result = hybrid_run(case, trajectory=Trajectory(None, cadence=5))
    assert result.ledger.aborted is None
    assert calls and all(kw['batch_size'] == 16 for kw in calls)
    assert calls[0]['epochs'] == case.initial_epochs and 'freeze_first' not in calls[0]
    assert all(kw['freeze_first'] and kw['epochs'] == case.tl_epochs for kw in calls[1:])
    assert 1 <= len(calls) <= 1 + result.ledger.n_switch


def test_batch_size_validation():
    with pytest.raises(ConfigError) as err:
        config(batch_size=1)
    assert err.value.key == 'batch_size'


def test_loop_wall_time_excludes_initial_training(tiny_case_file):
    _, case = tiny_case_file(total_steps=30)
    ledger = hybrid_run(case, trajectory=Trajectory(None, cadence=5)).ledger
    assert ledger.time_initial_training > 0
    assert ledger.loop_wall_time == pytest.approx(ledger.wall_time - ledger.time_initial_training)
    assert ledger.accounted_time <= ledger.loop_wall_time < ledger.wall_time
