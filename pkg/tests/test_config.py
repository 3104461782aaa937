import os.path as osp

import pytest

from hybridtools.config import OUTPUT_ROOT_ENV, INIConfig, PythonConfig, load_config
from hybridtools.exceptions import ConfigError

from conftest import SETTINGS_DIR

MINIMAL = """[grid]
extents = 8, 8
lengths = 1, 1

[hybrid]
residual_threshold = {threshold}
"""


def write(tmp_path, text, name='case.cfg'):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


@pytest.mark.parametrize('name, t_hot, t_cold', [
    ('case1.cfg', 307.75, 288.15),
    ('case2.cfg', 317.75, 278.15),
    ('case3.cfg', 327.75, 268.15),
])
def test_bundled_cases(name, t_hot, t_cold):
    case = load_config(osp.join(SETTINGS_DIR, name))
    assert isinstance(case, INIConfig)
    assert case.extents == [64, 64] and case.ndim == 2
    assert (case.t_hot, case.t_cold) == (t_hot, t_cold)
    assert case.residual_threshold == 5.0 and case.total_steps == 5000
    assert case.hybrid_config().reference_mode == 'FixedAtFirstHandoff'
    params = case.physics_params()
    assert params.rayleigh == pytest.approx(1e6)
    assert params.T_ref == pytest.approx(0.5 * (t_hot + t_cold))
    assert case.hybrid_config().batch_size == 4096 and case.initial_epochs == 30
    assert case.model_options()['hidden'] == 128


def test_bundled_3d_case():
    case = load_config(osp.join(SETTINGS_DIR, 'case1_3d.cfg'))
    assert case.ndim == 3
    assert case.boundary_spec().names == ['u_x', 'u_y', 'u_z', 'T', 'p']


def test_python_settings_match_ini():
    py = load_config(osp.join(SETTINGS_DIR, 'case1_settings.py'))
    ini = load_config(osp.join(SETTINGS_DIR, 'case1.cfg'))
    assert isinstance(py, PythonConfig)
    for key in ('extents', 'lengths', 'rayleigh', 'prandtl', 'nu', 'dt', 't_hot', 't_cold',
                'residual_threshold', 'total_steps', 'tl_epochs', 'burst_len', 'tl_buffer', 'kind', 'run_name'):
        assert getattr(py, key) == getattr(ini, key), key
    assert py.hybrid_config() == ini.hybrid_config()


def test_defaults_fill_omitted_keys(tmp_path):
    case = load_config(write(tmp_path, MINIMAL.format(threshold=10)))
    assert case.total_steps == 5000 and case.tl_epochs == 2 and case.kind == 'FVMN'
    assert case.model_options() == dict(hidden=398, n_hidden=3, dropout=0.2, batch_norm=True)
    assert case.pcg_settings().preconditioner == 'ic'
    assert case.hybrid_config().batch_size is None


def test_missing_residual_threshold(tmp_path):
    with pytest.raises(ConfigError) as err:
        load_config(write(tmp_path, '[grid]\nextents = 8, 8\n'))
    assert err.value.key == 'residual_threshold'


def test_threshold_must_exceed_one(tmp_path):
    with pytest.raises(ConfigError) as err:
        load_config(write(tmp_path, MINIMAL.format(threshold=0.5)))
    assert err.value.key == 'residual_threshold'
    assert err.value.lineno == 6
    assert str(err.value).startswith("line 6: 'residual_threshold'")


def test_bad_value_reports_line(tmp_path):
    text = MINIMAL.format(threshold=5) + 'total_steps = many\n'
    with pytest.raises(ConfigError) as err:
        load_config(write(tmp_path, text))
    assert (err.value.key, err.value.lineno) == ('total_steps', 7)


@pytest.mark.parametrize('text, lineno', [
    ('extents = 8, 8\n', 1),
    ('[grid]\nextents = 8, 8\nextents = 9, 9\n', 3),
    ('[grid]\nextents = 8, 8\n[weather]\nrain = 1\n', 3),
])
def test_structural_errors(tmp_path, text, lineno):
    with pytest.raises(ConfigError) as err:
        load_config(write(tmp_path, text))
    assert err.value.lineno == lineno


def test_invalid_choices(tmp_path):
    with pytest.raises(ConfigError, match='kind'):
        load_config(write(tmp_path, MINIMAL.format(threshold=5) + '\n[model]\nkind = GRU\n'))
    with pytest.raises(ConfigError, match='hot wall'):
        load_config(write(tmp_path, MINIMAL.format(threshold=5) + '\n[boundary]\nt_hot = 280\n'))
    with pytest.raises(ConfigError, match='extents'):
        load_config(write(tmp_path, '[grid]\nextents = 8\n\n[hybrid]\nresidual_threshold = 5\n'))


def test_unsupported_format(tmp_path):
    with pytest.raises(ConfigError, match='unsupported'):
        load_config(write(tmp_path, '{}', name='case.json'))


def test_broken_python_settings(tmp_path):
    with pytest.raises(ConfigError) as err:
        load_config(write(tmp_path, 'grid = dict(\n    extents = [8, 8],\n)\nhybrid = 1 / 0\n', name='bad.py'))
    assert err.value.lineno == 4


def test_replace_and_output_root(tmp_path, monkeypatch):
    case = load_config(write(tmp_path, MINIMAL.format(threshold=5)))
    other = case.replace(residual_threshold=100.0, kind='FVFNO')
    assert other.residual_threshold == 100.0 and case.residual_threshold == 5.0
    assert set(other.model_options()) == {'width', 'modes', 'n_layers', 'activation', 'dropout', 'batch_norm'}
    with pytest.raises(ConfigError):
        case.replace(residual_threshold=1.0)
    with pytest.raises(ConfigError):
        case.replace(colour='blue')
    monkeypatch.setenv(OUTPUT_ROOT_ENV, str(tmp_path / 'elsewhere'))
    assert case.run_dir == osp.join(str(tmp_path / 'elsewhere'), 'case')


def test_batch_size_must_hold_two_cells(tmp_path):
    text = MINIMAL.format(threshold=5) + '\n[training]\nbatch_size = 1\n'
    with pytest.raises(ConfigError) as err:
        load_config(write(tmp_path, text))
    assert (err.value.key, err.value.lineno) == ('batch_size', 9)
