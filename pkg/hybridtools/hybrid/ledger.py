'''
@File    :  ledger.py
@Desc    :  Step and wall-time accounting of a hybrid run and the speedup factor.
            Times are accumulated per bucket (solver steps, surrogate steps, transfer
            learning) and reported as means per unit.
'''

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

LEDGER_COLUMNS = ['t_CFD', 't_ML', 't_up', 'n_switch', 'n_CFD', 'n_ML', 'CFD (s)', 'Hybrid (s)',
                  'psi', 'Steps/switch']


def speedup_psi(ledger, N) -> float:
    """ psi = N t_CFD / (n_CFD t_CFD + n_ML t_ML + n_switch t_up). """
    hybrid = ledger.n_CFD * ledger.t_CFD + ledger.n_ML * ledger.t_ML + ledger.n_switch * ledger.t_up
    return N * ledger.t_CFD / hybrid


@dataclass
class HybridLedger:
    """ Counts, timings and residual history of one hybrid run.

    A switch is every surrogate-to-solver handoff, whether the residual guard
    fired or the surrogate produced a non-finite state (`n_forced` counts the
    latter). A rollout that ends because the step budget is exhausted is kept
    in `final_rollout` and is not a switch.
    """
    n_CFD: int = 0
    n_ML: int = 0
    n_switch: int = 0
    n_forced: int = 0
    n_flux_fallback: int = 0
    n_flux_skipped: int = 0
    degenerate_reference: bool = False
    rollout_lengths: list = field(default_factory=list)
    rollout_starts: list = field(default_factory=list)
    final_rollout: int = None
    residual_trace: list = field(default_factory=list)
    projection_reduction: list = field(default_factory=list)
    time_cfd: float = 0.0
    time_ml: float = 0.0
    time_up: float = 0.0
    time_initial_training: float = 0.0
    time_overhead: float = 0.0
    wall_time: float = 0.0
    aborted: str = None

    # -- recording ----------------------------------------------------------
    def record_cfd(self, seconds):
        self.n_CFD += 1
        self.time_cfd += seconds

    def record_ml(self, seconds, step, r_rel, accepted):
        """ One surrogate prediction; only accepted steps advance the run. """
        self.time_ml += seconds
        self.residual_trace.append((int(step), float(r_rel), bool(accepted)))
        if accepted:
            self.n_ML += 1

    def record_rollout(self, length, start_step, switched, forced=False):
        if switched:
            self.n_switch += 1
            self.n_forced += int(forced)
            self.rollout_lengths.append(int(length))
            self.rollout_starts.append(int(start_step))
        else:
            self.final_rollout = int(length)

    def record_update(self, seconds):
        self.time_up += seconds

    # -- means --------------------------------------------------------------
    @property
    def t_CFD(self) -> float:
        return self.time_cfd / self.n_CFD if self.n_CFD else 0.0

    @property
    def t_ML(self) -> float:
        """ Surrogate time per accepted step, rejected predictions included in the total. """
        return self.time_ml / self.n_ML if self.n_ML else 0.0

    @property
    def t_up(self) -> float:
        return self.time_up / self.n_switch if self.n_switch else 0.0

    @property
    def completed_steps(self) -> int:
        return self.n_CFD + self.n_ML

    @property
    def mean_steps_per_switch(self) -> float:
        return float(np.mean(self.rollout_lengths)) if self.rollout_lengths else 0.0

    @property
    def accounted_time(self) -> float:
        return self.time_cfd + self.time_ml + self.time_up

    @property
    def loop_wall_time(self) -> float:
        """ Wall time of the run without the initial training, the span the buckets account for. """
        return self.wall_time - self.time_initial_training

    def accepted_residuals(self) -> np.ndarray:
        return np.array([r for _, r, ok in self.residual_trace if ok])

    def check_invariants(self, threshold) -> None:
        assert len(self.rollout_lengths) == self.n_switch, \
            f'{len(self.rollout_lengths)} rollouts recorded for {self.n_switch} switches'
        accepted = self.accepted_residuals()
        assert np.all(accepted <= threshold), \
            f'accepted surrogate step with R_rel {accepted.max():.4g} above threshold {threshold}'

    # -- output -------------------------------------------------------------
    def summary(self, N=None) -> dict:
        N = self.completed_steps if N is None else N
        return {
            't_CFD': self.t_CFD,
            't_ML': self.t_ML,
            't_up': self.t_up,
            'n_switch': self.n_switch,
            'n_CFD': self.n_CFD,
            'n_ML': self.n_ML,
            'CFD (s)': N * self.t_CFD,
            'Hybrid (s)': self.accounted_time,
            'psi': speedup_psi(self, N) if self.t_CFD > 0 else float('nan'),
            'Steps/switch': self.mean_steps_per_switch,
        }

    def to_frame(self, N=None) -> pd.DataFrame:
        """ Single-row table with the sweep column names. """
        return pd.DataFrame([self.summary(N)], columns=LEDGER_COLUMNS)

    def to_report(self, N=None) -> str:
        s = self.summary(N)
        lines = [
            'hybrid run ledger',
            f'  steps            : {self.completed_steps} (CFD {self.n_CFD}, ML {self.n_ML})',
            f'  switches         : {self.n_switch} (forced {self.n_forced})',
            f'  mean steps/switch: {s["Steps/switch"]:.2f}',
            f'  t_CFD / t_ML / t_up [s]: {s["t_CFD"]:.4g} / {s["t_ML"]:.4g} / {s["t_up"]:.4g}',
            f'  CFD-only estimate [s]  : {s["CFD (s)"]:.4g}',
            f'  hybrid accounted [s]   : {s["Hybrid (s)"]:.4g} (wall {self.loop_wall_time:.4g} '
            f'+ initial training {self.time_initial_training:.4g})',
            f'  speedup psi      : {s["psi"]:.4f}',
            f'  flux corrections : {len(self.projection_reduction)} '
            f'(fallbacks {self.n_flux_fallback}, skipped {self.n_flux_skipped})',
        ]
        if self.degenerate_reference:
            lines.append('  WARNING: residual reference below floor, ratios are relative to the floor')
        if self.aborted:
            lines.append(f'  ABORTED: {self.aborted}')
        return '\n'.join(lines)

    def residual_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.residual_trace, columns=['step', 'R_rel', 'accepted'])


def rollout_statistics(ledger: HybridLedger, total_steps=None, skip=2) -> dict:
    """ Mean rollout length of the rollouts starting in the first and last quarter of the run.

    The first `skip` switches are ignored; a quarter without rollouts yields NaN.
    """
    N = ledger.completed_steps if total_steps is None else total_steps
    starts = np.asarray(ledger.rollout_starts[skip:])
    lengths = np.asarray(ledger.rollout_lengths[skip:], dtype=float)
    first = lengths[starts < 0.25 * N]
    last = lengths[starts >= 0.75 * N]
    return {
        'first_quarter': float(first.mean()) if first.size else float('nan'),
        'last_quarter': float(last.mean()) if last.size else float('nan'),
        'n_first': int(first.size),
        'n_last': int(last.size),
    }
