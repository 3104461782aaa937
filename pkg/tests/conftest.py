import os.path as osp

import numpy as np
import pytest
import torch

from hybridtools.config import load_config
from hybridtools.mesh import BoundarySpec, StructuredGrid
from hybridtools.solver import BoussinesqSolver, PhysicsParams

SETTINGS_DIR = osp.join(osp.dirname(osp.dirname(osp.abspath(__file__))), 'settings')

T_HOT, T_COLD = 307.75, 288.15

TINY_CASE = """
[grid]
extents = 8, 8
lengths = 1.0, 1.0

[physics]
rayleigh = 1e6
prandtl = 0.705
nu = 1.5e-5
dt = 0.5

[boundary]
t_hot = 307.75
t_cold = 288.15

[hybrid]
residual_threshold = 5
total_steps = {total_steps}
tl_epochs = 2
burst_len = 5
tl_buffer = 3
initial_steps = 5
snapshot_cadence = 5

[training]
initial_epochs = 5
seed = 0

[model]
kind = FVMN
hidden = 16
n_hidden = 2
width = 8
modes = 4
n_layers = 2

[output]
directory = {directory}
run_name = tiny
"""


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False, help='run desk-scale acceptance tests')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def single_thread():
    torch.set_num_threads(1)


@pytest.fixture
def grid():
    return StructuredGrid((8, 8), (1.0, 1.0))


@pytest.fixture
def cavity():
    return BoundarySpec.cavity(2, T_HOT, T_COLD)


@pytest.fixture
def params():
    return PhysicsParams.from_rayleigh(1e6, 0.705, 1.5e-5, T_HOT, T_COLD, dt=0.5)


@pytest.fixture
def solver(grid, cavity, params):
    return BoussinesqSolver(grid, cavity, params)


@pytest.fixture
def heated_state(solver):
    """ Rest state whose first cell column has already taken the hot wall temperature. """
    state = solver.initial_state()
    state.T[:, 0] = T_HOT
    state.T[:, -1] = T_COLD
    return state


@pytest.fixture
def burst(solver, heated_state):
    """ Heated state followed by three solver steps. """
    return [heated_state] + solver.cfd_run_burst(heated_state, 3)


@pytest.fixture
def tiny_case_file(tmp_path):
    def write(total_steps=30, **overrides):
        text = TINY_CASE.format(total_steps=total_steps, directory=tmp_path / 'output')
        path = tmp_path / 'tiny.cfg'
        path.write_text(text)
        case = load_config(str(path))
        return path, (case.replace(**overrides) if overrides else case)
    return write


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
