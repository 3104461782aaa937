from .ledger import HybridLedger, LEDGER_COLUMNS, rollout_statistics, speedup_psi
from .orchestrator import (FIXED_AT_FIRST_HANDOFF, PER_ROLLOUT, REFERENCE_MODES, FluxCorrection, HybridConfig,
                           HybridResult, RolloutResult, density_from_state, flux_correct, hybrid_run, initial_model,
                           ml_only_rollout, ml_rollout, relative_residual, transfer_learn_cycle)

__all__ = [
    'HybridLedger', 'LEDGER_COLUMNS', 'rollout_statistics', 'speedup_psi',
    'FIXED_AT_FIRST_HANDOFF', 'PER_ROLLOUT', 'REFERENCE_MODES', 'FluxCorrection', 'HybridConfig',
    'HybridResult', 'RolloutResult', 'density_from_state', 'flux_correct', 'hybrid_run', 'initial_model',
    'ml_only_rollout', 'ml_rollout', 'relative_residual', 'transfer_learn_cycle',
]
