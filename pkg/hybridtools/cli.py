'''
@File    :  cli.py
@Desc    :  Command-line entry point.

            hybridtools cfd-run    --config case1.cfg [--steps N]
            hybridtools train      --config case1.cfg [--checkpoint model.ckpt]
            hybridtools hybrid-run --config case2.cfg [--pretrained case1.ckpt]
            hybridtools eval       TRUTH_DIR RUN_DIR [--output errors.csv]
            hybridtools sweep      --config case1.cfg --epochs 2 10 --thresholds 5 100
            hybridtools probe      RUN_DIR --config case1.cfg
'''

import argparse
import logging
import os
import os.path as osp
import sys

import torch

from ._logging import get_logger, setup_logging
from .config import load_config
from .datareader import Trajectory, TrajectoryReader
from .exceptions import HybridToolsError
from .hybrid import hybrid_run, initial_model
from .mesh import build_grid
from .metrics import (architecture_benchmark, benchmark_sweep, cfd_reference_run, error_series,
                      probe_series, time_averaged)
from .solver import BoussinesqSolver
from .surrogate import MODEL_KINDS, load_checkpoint, save_checkpoint

logger = get_logger(__name__)


def _write_csv(frame, path):
    """ Write through a `.partial` file so that a failed run leaves no half-written CSV. """
    os.makedirs(osp.dirname(osp.abspath(path)), exist_ok=True)
    partial = f'{path}.partial'
    frame.to_csv(partial, index=False)
    os.replace(partial, path)
    return path


def _write_text(text, path):
    partial = f'{path}.partial'
    with open(partial, 'w') as f:
        f.write(text + '\n')
    os.replace(partial, path)
    return path


def cmd_cfd_run(args):
    case = load_config(args.config)
    run_dir = args.output or osp.join(case.run_dir, 'cfd')
    trajectory = Trajectory(run_dir, cadence=case.snapshot_cadence)
    cfd_reference_run(case, trajectory, n_steps=args.steps)
    print(f'{len(trajectory)} snapshots written to {run_dir}')
    return 0


def cmd_train(args):
    case = load_config(args.config)
    grid = build_grid(case)
    boundary = case.boundary_spec()
    solver = BoussinesqSolver(grid, boundary, case.physics_params(), case.pcg_settings())
    state = solver.initial_state()
    snapshots = solver.cfd_run_burst(state, case.initial_steps)
    model, result = initial_model(case, snapshots, boundary)
    path = args.checkpoint or osp.join(case.run_dir, 'model.ckpt')
    os.makedirs(osp.dirname(osp.abspath(path)), exist_ok=True)
    save_checkpoint(model, path)
    print(f'{model.kind} trained on {result.n_pairs} pairs, best val loss {result.best_val_loss:.4e}, '
          f'saved to {path}')
    return 0


def cmd_hybrid_run(args):
    case = load_config(args.config)
    model = load_checkpoint(args.pretrained) if args.pretrained else None
    trajectory = Trajectory(case.run_dir, cadence=case.snapshot_cadence)
    result = hybrid_run(case, model=model, trajectory=trajectory)
    ledger = result.ledger
    report = ledger.to_report(case.total_steps)
    _write_text(report, trajectory.path('ledger.txt'))
    _write_csv(ledger.to_frame(case.total_steps), trajectory.path('ledger.csv'))
    _write_csv(ledger.residual_frame(), trajectory.path('residuals.csv'))
    print(report)
    return 1 if ledger.aborted else 0


def cmd_eval(args):
    truth, run = TrajectoryReader(args.truth), TrajectoryReader(args.run)
    series = error_series(truth, run)
    output = args.output or osp.join(args.run, 'errors.csv')
    _write_csv(series, output)
    print(time_averaged(series).to_string())
    return 0


def cmd_sweep(args):
    case = load_config(args.config)
    truth = cfd_reference_run(case)
    if args.architectures:
        frame = architecture_benchmark(case, kinds=args.architectures, truth=truth)
    else:
        frame = benchmark_sweep(case, args.epochs, args.thresholds, truth=truth, workers=args.workers)
    output = args.output or osp.join(case.run_dir, 'sweep.csv')
    _write_csv(frame, output)
    print(frame.to_string(index=False))
    return 0


def cmd_probe(args):
    case = load_config(args.config)
    grid = build_grid(case)
    frame = probe_series(TrajectoryReader(args.run, grid), grid)
    output = args.output or osp.join(args.run, 'probes.csv')
    _write_csv(frame, output)
    print(f'{len(frame)} probe readings written to {output}')
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='hybridtools',
                                     description='Residual-guided hybrid surrogate / solver runs for natural convection.')
    parser.add_argument('--threads', type=int, default=1, help='torch intra-op threads (1 for bitwise reproducibility)')
    parser.add_argument('--log-level', default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('cfd-run', help='solver-only trajectory')
    p.add_argument('--config', required=True)
    p.add_argument('--steps', type=int, default=None, help='defaults to total_steps of the case')
    p.add_argument('--output', default=None, help='run directory, defaults to <run_dir>/cfd')
    p.set_defaults(func=cmd_cfd_run)

    p = sub.add_parser('train', help='initial model from a solver burst')
    p.add_argument('--config', required=True)
    p.add_argument('--checkpoint', default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser('hybrid-run', help='residual-guided hybrid run')
    p.add_argument('--config', required=True)
    p.add_argument('--pretrained', default=None, help='checkpoint; skips initial training')
    p.set_defaults(func=cmd_hybrid_run)

    p = sub.add_parser('eval', help='error series of a run against a reference run')
    p.add_argument('truth')
    p.add_argument('run')
    p.add_argument('--output', default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser('sweep', help='threshold / epoch sweep or architecture comparison')
    p.add_argument('--config', required=True)
    p.add_argument('--epochs', type=int, nargs='+', default=[2, 10])
    p.add_argument('--thresholds', type=float, nargs='+', default=[5.0, 10.0, 100.0])
    p.add_argument('--architectures', nargs='+', choices=MODEL_KINDS, default=None)
    p.add_argument('--workers', type=int, default=1)
    p.add_argument('--output', default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser('probe', help='probe time series of a run directory')
    p.add_argument('run')
    p.add_argument('--config', required=True)
    p.add_argument('--output', default=None)
    p.set_defaults(func=cmd_probe)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(getattr(logging, args.log_level))
    torch.set_num_threads(args.threads)
    try:
        return args.func(args)
    except HybridToolsError as err:
        print(f'error: {err}', file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
