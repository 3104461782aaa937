'''
@File    :  orchestrator.py
@Desc    :  Residual-guarded coupling of the surrogate and the reference solver.

            Loop: surrogate rollout while the relative mass residual stays below the
            threshold -> density reconstruction -> flux projection -> short solver
            burst -> transfer learning on the last burst states, until the step
            budget is used up.
'''

import math
import time
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .._logging import get_logger
from ..datareader import Trajectory
from ..exceptions import ConfigError, ConvergenceError, HybridToolsError, SurrogateDivergenceError
from ..fvm import (LaplacianOperator, PcgSettings, divergence, face_flux, face_gradient_flux, gradient,
                   neumann_faces, pcg_solve)
from ..mesh import BoundarySpec, FieldState, StructuredGrid, build_grid
from ..solver import (BoussinesqSolver, GasConstants, MassResidual, compute_mass_residual,
                      flux_residual, ideal_gas_density)
from ..surrogate import SurrogateModel, fit_norm_stats, predict_next_state, save_checkpoint, train
from .ledger import HybridLedger

logger = get_logger(__name__)

FIXED_AT_FIRST_HANDOFF = 'FixedAtFirstHandoff'
PER_ROLLOUT = 'PerRollout'
REFERENCE_MODES = (FIXED_AT_FIRST_HANDOFF, PER_ROLLOUT)
RESIDUAL_FLOOR = 1e-30

RolloutResult = namedtuple('RolloutResult', ['state', 'steps', 'trace', 'switched', 'forced'])
FluxCorrection = namedtuple('FluxCorrection', ['state', 'projected', 'residual_before', 'residual_after'])
HybridResult = namedtuple('HybridResult', ['trajectory', 'ledger', 'model'])


@dataclass
class HybridConfig:
    """ Switching and transfer-learning settings of a hybrid run.

    Args:
        residual_threshold (float): Largest accepted relative mass residual, > 1.
        total_steps (int): Step budget N (solver + surrogate steps).
        tl_epochs (int): Epochs per transfer-learning cycle.
        burst_len (int): Solver steps after every switch.
        tl_buffer (int): Most recent burst states used for transfer learning.
        reference_mode (str): 'FixedAtFirstHandoff' or 'PerRollout'.
        flux_correction (bool): Project the handoff flux before the solver restarts.
        snapshot_cadence (int): Persist every k-th step.
        initial_steps (int): Solver steps before the first training.
        initial_epochs (int): Epochs of the initial training.
        batch_size (int, optional): Mini-batch size in cells of every training; full batch when None.
    """
    residual_threshold: float
    total_steps: int
    tl_epochs: int = 2
    burst_len: int = 10
    tl_buffer: int = 3
    reference_mode: str = FIXED_AT_FIRST_HANDOFF
    flux_correction: bool = True
    snapshot_cadence: int = 10
    initial_steps: int = 10
    initial_epochs: int = 200
    batch_size: int = None

    def __post_init__(self):
        if not self.residual_threshold > 1:
            raise ConfigError(f'must exceed 1, got {self.residual_threshold}', key='residual_threshold')
        if self.tl_buffer < 2:
            raise ConfigError(f'must be at least 2, got {self.tl_buffer}', key='tl_buffer')
        if self.burst_len < self.tl_buffer:
            raise ConfigError(f'must be at least tl_buffer ({self.tl_buffer}), got {self.burst_len}',
                              key='burst_len')
        if self.total_steps < self.burst_len:
            raise ConfigError(f'must be at least burst_len ({self.burst_len}), got {self.total_steps}',
                              key='total_steps')
        if self.initial_steps < 2:
            raise ConfigError(f'must be at least 2, got {self.initial_steps}', key='initial_steps')
        if self.reference_mode not in REFERENCE_MODES:
            raise ConfigError(f'expected one of {REFERENCE_MODES}, got {self.reference_mode!r}',
                              key='reference_mode')
        if self.tl_epochs < 0 or self.initial_epochs < 0:
            raise ConfigError('epoch counts must be nonnegative', key='tl_epochs')
        if self.snapshot_cadence < 1:
            raise ConfigError(f'must be positive, got {self.snapshot_cadence}', key='snapshot_cadence')
        if self.batch_size is not None and self.batch_size < 2:
            raise ConfigError(f'must be at least 2, got {self.batch_size}', key='batch_size')


def relative_residual(current: MassResidual, reference: MassResidual) -> tuple:
    """ R_rel = current / reference.

    Returns:
        r_rel (float): The ratio.
        degenerate (bool): The reference was below RESIDUAL_FLOOR and the floor was used.
    """
    degenerate = reference.value <= RESIDUAL_FLOOR
    denom = RESIDUAL_FLOOR if degenerate else reference.value
    return current.value / denom, degenerate


def density_from_state(state: FieldState, p_abs, constants: GasConstants = GasConstants()) -> np.ndarray:
    """ Ideal-gas density from the surrogate temperature and the last solver pressure.

    Raises:
        SurrogateDivergenceError: Nonpositive temperature.
    """
    if not np.all(state.T > 0):
        raise SurrogateDivergenceError(f'nonpositive temperature at step {state.step}, min {state.T.min():.4g} K')
    return ideal_gas_density(p_abs, state.T, constants)


def flux_correct(state: FieldState, grid: StructuredGrid, pcg: PcgSettings = None,
                 op: LaplacianOperator = None) -> FluxCorrection:
    """ Project the face flux of a predicted velocity onto a divergence-free space.

    Solves lap(lambda) = div(phi) with zero-gradient walls, then
    phi -= area * face grad(lambda) and u -= grad(lambda). When the solve fails
    the uncorrected flux is handed over and `projected` is False.

    Args:
        op (LaplacianOperator, optional): Pure-Neumann operator of `grid`, reused
            across calls together with its preconditioner; built when omitted.
    """
    pcg = pcg or PcgSettings(tol=1e-8, max_iter=2000)
    if op is None:
        op = LaplacianOperator(grid, neumann_faces(grid.ndim))
    assert op.singular, 'flux correction needs the zero-gradient operator'
    faces = op.faces
    phi = face_flux(grid, state.u)
    before = flux_residual(phi, grid)
    out = state.copy()
    out.phi = phi
    try:
        solve = pcg_solve(op, divergence(grid, phi), pcg)
        if not solve.converged:
            raise ConvergenceError('flux projection did not converge', solve.iterations, solve.residual)
    except ConvergenceError as err:
        logger.warning(f'flux correction failed at step {state.step}, handing over uncorrected flux: {err}')
        return FluxCorrection(out, False, before, before)

    lam = solve.x
    out.phi = tuple(f - g for f, g in zip(phi, face_gradient_flux(grid, lam, faces)))
    out.u = state.u - gradient(grid, lam, faces)
    after = flux_residual(out.phi, grid)
    logger.debug(f'flux correction at step {state.step}: div^2 {before:.3e} -> {after:.3e}')
    return FluxCorrection(out, True, before, after)


def ml_rollout(model: SurrogateModel, state: FieldState, grid: StructuredGrid, boundary: BoundarySpec,
               config: HybridConfig, reference: MassResidual, ledger: HybridLedger = None,
               budget=None, trajectory=None) -> RolloutResult:
    """ Autoregressive surrogate steps under the residual guard.

    A prediction is accepted while its relative mass residual stays at or below
    the threshold. The rollout ends at the first rejected prediction, at a
    non-finite or nonpositive-temperature prediction (forced switch), or when
    `budget` steps have been accepted.

    Returns:
        RolloutResult: Last accepted state, accepted steps, (step, R_rel) trace,
                       whether a handoff is required and whether it was forced.
    """
    budget = config.total_steps if budget is None else budget
    current = state
    trace = []
    steps = 0
    while steps < budget:
        tic = time.perf_counter()
        forced = False
        try:
            candidate = predict_next_state(model, current, grid, boundary)
            if not np.all(candidate.T > 0):
                raise SurrogateDivergenceError(f'nonpositive temperature at step {candidate.step}')
            r_rel, degenerate = relative_residual(compute_mass_residual(candidate, grid), reference)
            accepted = r_rel <= config.residual_threshold
        except SurrogateDivergenceError as err:
            logger.warning(f'forced switch: {err}')
            r_rel, degenerate, accepted, forced = math.nan, False, False, True
        elapsed = time.perf_counter() - tic

        step = current.step + 1
        trace.append((step, r_rel))
        if ledger is not None:
            ledger.record_ml(elapsed, step, r_rel, accepted)
            ledger.degenerate_reference |= degenerate
        if not accepted:
            return RolloutResult(current, steps, trace, True, forced)
        current = candidate
        steps += 1
        if trajectory is not None:
            trajectory.append(current)
    return RolloutResult(current, steps, trace, False, False)


def ml_only_rollout(model: SurrogateModel, state: FieldState, grid: StructuredGrid, boundary: BoundarySpec,
                    reference: MassResidual, n_steps) -> tuple:
    """ Unguarded surrogate rollout for `n_steps`, stopping only on non-finite output.

    Returns:
        state (FieldState): Last finite state.
        r_rel (list[float]): Relative mass residual of every step.
    """
    r_rel = []
    for _ in range(n_steps):
        try:
            nxt = predict_next_state(model, state, grid, boundary)
        except SurrogateDivergenceError as err:
            logger.warning(f'surrogate-only rollout stopped: {err}')
            break
        state = nxt
        r_rel.append(relative_residual(compute_mass_residual(state, grid), reference)[0])
    return state, r_rel


def transfer_learn_cycle(model: SurrogateModel, burst_snapshots, boundary: BoundarySpec,
                         config: HybridConfig, ledger: HybridLedger = None, lr=1e-3):
    """ Fine-tune on the last `tl_buffer` solver states with the first layers frozen. """
    assert len(burst_snapshots) >= 2, f'transfer learning needs 2 snapshots, got {len(burst_snapshots)}'
    buffer = list(burst_snapshots)[-config.tl_buffer:]
    result = train(model, buffer, boundary, epochs=config.tl_epochs, freeze_first=True, lr=lr,
                   batch_size=config.batch_size)
    if ledger is not None:
        ledger.record_update(result.elapsed)
    return result


def initial_model(case, snapshots, boundary: BoundarySpec) -> tuple:
    """ Fit normalization bounds on the initial solver states and train a fresh model.

    Returns:
        model (SurrogateModel): Trained model.
        result (TrainResult): Training summary.
    """
    stats = fit_norm_stats(snapshots, boundary)
    model = SurrogateModel(case.model_kind, case.ndim, stats, seed=case.seed, **case.model_options())
    hc = case.hybrid_config()
    result = train(model, snapshots, boundary, epochs=hc.initial_epochs, lr=case.learning_rate,
                   batch_size=hc.batch_size, seed=case.seed)
    return model, result


def hybrid_run(case, model: SurrogateModel = None, trajectory=None) -> HybridResult:
    """ Run the residual-guided hybrid loop for one case.

    Args:
        case (BaseConfig): Validated case configuration.
        model (SurrogateModel, optional): Pretrained model; when given, the initial
            training is skipped and the model adapts only through transfer learning.
        trajectory (Trajectory, optional): Receives every state; created from the
            case output settings when omitted.

    Returns:
        HybridResult: (trajectory, ledger, model). On an aborting error the partial
                      ledger is returned with `ledger.aborted` set.
    """
    grid = build_grid(case)
    boundary = case.boundary_spec()
    params = case.physics_params()
    hc = case.hybrid_config()
    pcg = case.pcg_settings()
    solver = BoussinesqSolver(grid, boundary, params, pcg)
    if trajectory is None:
        trajectory = Trajectory(case.run_dir, cadence=hc.snapshot_cadence)
    ledger = HybridLedger()
    N = hc.total_steps
    wall = time.perf_counter()

    try:
        if model is not None and model.ndim != grid.ndim:
            raise ConfigError(f'pretrained {model.ndim}D model cannot run a {grid.ndim}D case', key='pretrained')
        state = solver.initial_state()
        trajectory.append(state)
        initial = solver.cfd_run_burst(state, min(hc.initial_steps, N), ledger)
        trajectory.extend(initial)
        state = last_cfd = initial[-1]
        logger.info(f'initial solver phase: {len(initial)} steps')

        if model is None:
            tic = time.perf_counter()
            model, _ = initial_model(case, initial, boundary)
            ledger.time_initial_training = time.perf_counter() - tic
        reference = compute_mass_residual(state, grid)

        while ledger.completed_steps < N:
            if hc.reference_mode == PER_ROLLOUT:
                reference = compute_mass_residual(last_cfd, grid)
            start = state.step
            rollout = ml_rollout(model, state, grid, boundary, hc, reference, ledger,
                                 budget=N - ledger.completed_steps, trajectory=trajectory)
            state = rollout.state
            if not rollout.switched:
                ledger.record_rollout(rollout.steps, start, switched=False)
                break

            tic = time.perf_counter()
            state.rho = density_from_state(state, solver.absolute_pressure(last_cfd.p), params.gas)
            if hc.flux_correction:
                corrected = flux_correct(state, grid, pcg, op=solver.pressure_op)
                state = corrected.state
                if corrected.projected:
                    reduction = corrected.residual_before / max(corrected.residual_after, RESIDUAL_FLOOR)
                    ledger.projection_reduction.append(reduction)
                else:
                    ledger.n_flux_fallback += 1
            else:
                state.phi = face_flux(grid, state.u)
                ledger.n_flux_skipped += 1
            ledger.time_overhead += time.perf_counter() - tic

            n_burst = min(hc.burst_len, N - ledger.completed_steps)
            burst = solver.cfd_run_burst(state, n_burst, ledger)
            trajectory.extend(burst)
            ledger.record_rollout(rollout.steps, start, switched=True, forced=rollout.forced)
            logger.info(f'switch {ledger.n_switch} at step {state.step}: {rollout.steps} ML steps'
                        f'{" (forced)" if rollout.forced else ""}, {n_burst} CFD steps')
            state = last_cfd = burst[-1]

            if len(burst) >= 2:
                result = transfer_learn_cycle(model, burst, boundary, hc, ledger, lr=case.learning_rate)
                if trajectory.run_dir is not None and result.best_epoch > 0:
                    save_checkpoint(model, trajectory.path('model.ckpt'))
    except HybridToolsError as err:
        ledger.aborted = f'{type(err).__name__}: {err}'
        logger.error(f'hybrid run aborted after {ledger.completed_steps} steps: {ledger.aborted}')
    finally:
        trajectory.flush()
        ledger.wall_time = time.perf_counter() - wall

    if ledger.aborted is None:
        ledger.check_invariants(hc.residual_threshold)
    return HybridResult(trajectory, ledger, model)
