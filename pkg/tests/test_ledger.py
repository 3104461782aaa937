import numpy as np
import pytest

from hybridtools.hybrid import LEDGER_COLUMNS, HybridLedger, rollout_statistics, speedup_psi


def ledger_with_means(t_cfd, t_ml, t_up, n_switch, n_cfd, n_ml):
    return HybridLedger(n_CFD=n_cfd, n_ML=n_ml, n_switch=n_switch, time_cfd=t_cfd * n_cfd,
                        time_ml=t_ml * n_ml, time_up=t_up * n_switch)


@pytest.mark.parametrize('means, N, psi', [
    ((0.42, 0.026, 1.3, 343, 3423, 6585), 10008, 2.04),
    ((0.43, 0.026, 1.31, 170, 1693, 8307), 10000, 3.68),
])
def test_speedup_from_published_ledgers(means, N, psi):
    assert speedup_psi(ledger_with_means(*means), N) == pytest.approx(psi, rel=0.02)


def test_pure_solver_run_has_no_speedup():
    ledger = ledger_with_means(0.4, 0.0, 0.0, 0, 500, 0)
    assert speedup_psi(ledger, 500) == pytest.approx(1.0)


def test_speedup_grows_as_solver_steps_vanish():
    fast = [speedup_psi(ledger_with_means(1.0, 1e-9, 1e-9, 1, n, 1000 - n), 1000) for n in (100, 10, 1)]
    assert fast[0] < fast[1] < fast[2]
    assert fast[2] == pytest.approx(1000, rel=1e-3)


def test_recording():
    ledger = HybridLedger()
    for _ in range(4):
        ledger.record_cfd(0.5)
    ledger.record_ml(0.1, 5, 1.2, True)
    ledger.record_ml(0.1, 6, 1.4, True)
    ledger.record_ml(0.1, 7, 9.0, False)
    ledger.record_rollout(2, 4, switched=True)
    ledger.record_update(0.8)
    ledger.record_ml(0.1, 7, float('nan'), False)
    ledger.record_rollout(0, 6, switched=True, forced=True)
    ledger.record_update(0.4)
    ledger.record_rollout(3, 11, switched=False)

    assert (ledger.n_CFD, ledger.n_ML, ledger.n_switch, ledger.n_forced) == (4, 2, 2, 1)
    assert ledger.t_CFD == pytest.approx(0.5)
    assert ledger.t_ML == pytest.approx(0.4 / 2)
    assert ledger.t_up == pytest.approx(0.6)
    assert ledger.final_rollout == 3
    assert ledger.mean_steps_per_switch == pytest.approx(1.0)
    np.testing.assert_allclose(ledger.accepted_residuals(), [1.2, 1.4])
    ledger.check_invariants(threshold=5.0)
    with pytest.raises(AssertionError, match='above threshold'):
        ledger.check_invariants(threshold=1.3)


def test_tables():
    ledger = ledger_with_means(0.42, 0.026, 1.3, 343, 3423, 6585)
    frame = ledger.to_frame(10008)
    assert list(frame.columns) == LEDGER_COLUMNS
    assert frame['CFD (s)'][0] == pytest.approx(10008 * 0.42)
    report = ledger.to_report(10008)
    assert 'speedup psi' in report and 'ABORTED' not in report
    ledger.aborted = 'CFLViolationError: too fast'
    assert 'ABORTED' in ledger.to_report()


def test_empty_ledger_summary():
    summary = HybridLedger().summary()
    assert np.isnan(summary['psi'])
    assert summary['t_ML'] == 0.0


def test_rollout_statistics():
    ledger = HybridLedger(rollout_starts=[0, 5, 10, 20, 80, 90], rollout_lengths=[9, 9, 2, 4, 30, 40])
    stats = rollout_statistics(ledger, total_steps=100)
    assert stats['first_quarter'] == pytest.approx(3.0)
    assert stats['last_quarter'] == pytest.approx(35.0)
    assert (stats['n_first'], stats['n_last']) == (2, 2)
    assert np.isnan(rollout_statistics(HybridLedger(), total_steps=100)['first_quarter'])


def test_loop_wall_time_leaves_out_initial_training():
    ledger = HybridLedger(time_cfd=3.0, time_ml=1.5, time_up=0.5, time_initial_training=40.0, wall_time=45.2)
    assert ledger.loop_wall_time == pytest.approx(5.2)
    assert ledger.accounted_time == pytest.approx(5.0)
    assert 'wall 5.2 + initial training 40' in ledger.to_report()
