""" Case configuration shared by every loader. """

import os
import os.path as osp

from .._logging import get_logger
from ..exceptions import ConfigError
from ..fvm import PcgSettings
from ..hybrid import HybridConfig
from ..mesh import BoundarySpec
from ..solver import PhysicsParams
from ..surrogate import MODEL_KINDS

logger = get_logger(__name__)

OUTPUT_ROOT_ENV = 'HYBRIDTOOLS_OUTPUT_ROOT'
REQUIRED = object()

# section -> key -> (type, default); REQUIRED marks keys without a default
SCHEMA = {
    'grid': {
        'extents': ('ints', [64, 64]),
        'lengths': ('floats', [1.0, 1.0]),
        'origin': ('floats', None),
    },
    'physics': {
        'rayleigh': (float, 1e6),
        'prandtl': (float, 0.705),
        'nu': (float, 1.5e-5),
        'g': (float, 9.81),
        'dt': (float, 0.5),
        'p_ambient': (float, 101325.0),
        'pcg_tol': (float, 1e-8),
        'pcg_max_iter': (int, 2000),
        'preconditioner': (str, 'ic'),
    },
    'boundary': {
        't_hot': (float, 307.75),
        't_cold': (float, 288.15),
    },
    'hybrid': {
        'residual_threshold': (float, REQUIRED),
        'total_steps': (int, 5000),
        'tl_epochs': (int, 2),
        'burst_len': (int, 10),
        'tl_buffer': (int, 3),
        'reference_mode': (str, 'FixedAtFirstHandoff'),
        'flux_correction': (bool, True),
        'snapshot_cadence': (int, 10),
        'initial_steps': (int, 10),
    },
    'training': {
        'initial_epochs': (int, 200),
        'batch_size': (int, None),
        'learning_rate': (float, 1e-3),
        'seed': (int, 0),
    },
    'model': {
        'kind': (str, 'FVMN'),
        'hidden': (int, 398),
        'n_hidden': (int, 3),
        'width': (int, 64),
        'modes': (int, 12),
        'n_layers': (int, 3),
        'activation': (str, 'relu'),
        'dropout': (float, 0.2),
        'batch_norm': (bool, True),
    },
    'output': {
        'directory': (str, 'output'),
        'run_name': (str, 'case'),
    },
}

_TRUE = {'1', 'true', 'yes', 'on'}
_FALSE = {'0', 'false', 'no', 'off'}


def convert(kind, value):
    """ Convert a raw (string or Python) value to the schema type. """
    if kind in ('ints', 'floats'):
        scalar = int if kind == 'ints' else float
        if isinstance(value, str):
            value = value.replace(',', ' ').split()
        return [scalar(v) for v in value]
    if kind is bool and isinstance(value, str):
        low = value.strip().lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ValueError(f'not a boolean: {value!r}')
    return kind(value)


class BaseConfig():
    """ Validated case configuration.

    Every schema key becomes an attribute; `extents`, `lengths`, `residual_threshold`
    and so on. Subclasses fill the raw values in `_load()` through `_apply()`.
    """

    def __init__(self):
        for section, keys in SCHEMA.items():
            for key, (_, default) in keys.items():
                setattr(self, key, None if default is REQUIRED else default)
        self.source = None

    def _load(self):
        raise NotImplementedError

    def _locate(self, key):
        """ Line number of `key` in the source file, if the format has lines. """
        return None

    def _apply(self, section, values: dict):
        schema = SCHEMA[section]
        for key, raw in values.items():
            if key not in schema:
                logger.warning(f"unknown key '{key}' in section [{section}] ignored")
                continue
            kind = schema[key][0]
            try:
                setattr(self, key, convert(kind, raw))
            except (TypeError, ValueError) as err:
                raise ConfigError(f'invalid value {raw!r}: {err}', key=key, lineno=self._locate(key)) from None

    def _require(self, provided: dict):
        for section, keys in SCHEMA.items():
            for key, (_, default) in keys.items():
                if default is REQUIRED and key not in provided.get(section, {}):
                    raise ConfigError(f'required key missing from section [{section}]', key=key)

    def _fail(self, key, message):
        raise ConfigError(message, key=key, lineno=self._locate(key))

    def validate(self):
        """ Check the invariants of every embedded type.

        Raises:
            ConfigError: Naming the offending key.
        """
        if len(self.extents) not in (2, 3):
            self._fail('extents', f'2 or 3 extents required, got {self.extents}')
        if len(self.lengths) != len(self.extents):
            self._fail('lengths', f'{len(self.extents)} lengths required, got {self.lengths}')
        if self.origin is not None and len(self.origin) != len(self.extents):
            self._fail('origin', f'{len(self.extents)} coordinates required, got {self.origin}')
        if any(n < 3 for n in self.extents):
            self._fail('extents', f'every extent must be at least 3, got {self.extents}')
        if any(length <= 0 for length in self.lengths):
            self._fail('lengths', f'lengths must be positive, got {self.lengths}')
        for key in ('rayleigh', 'prandtl', 'nu', 'g', 'dt', 'p_ambient', 'learning_rate'):
            if not getattr(self, key) > 0:
                self._fail(key, f'must be positive, got {getattr(self, key)}')
        if not self.t_hot > self.t_cold > 0:
            self._fail('t_hot', f'hot wall must be hotter than the cold wall, got {self.t_hot} <= {self.t_cold}')
        if self.kind not in MODEL_KINDS:
            self._fail('kind', f'expected one of {MODEL_KINDS}, got {self.kind!r}')
        if not 0.0 <= self.dropout < 1.0:
            self._fail('dropout', f'must be in [0, 1), got {self.dropout}')
        try:
            self.hybrid_config()
            self.pcg_settings()
        except ConfigError as err:
            raise ConfigError(err.message, key=err.key, lineno=self._locate(err.key)) from None
        except AssertionError as err:
            raise ConfigError(str(err), key='pcg_tol') from None
        return self

    # -- derived objects ------------------------------------------------------
    @property
    def ndim(self) -> int:
        return len(self.extents)

    @property
    def model_kind(self) -> str:
        return self.kind

    @property
    def run_dir(self) -> str:
        root = os.environ.get(OUTPUT_ROOT_ENV, self.directory)
        return osp.join(root, self.run_name)

    def physics_params(self) -> PhysicsParams:
        height = self.lengths[1]
        return PhysicsParams.from_rayleigh(self.rayleigh, self.prandtl, self.nu, self.t_hot, self.t_cold,
                                           self.dt, length=height, g=self.g, p_ambient=self.p_ambient)

    def boundary_spec(self) -> BoundarySpec:
        return BoundarySpec.cavity(self.ndim, self.t_hot, self.t_cold)

    def hybrid_config(self) -> HybridConfig:
        return HybridConfig(residual_threshold=self.residual_threshold, total_steps=self.total_steps,
                            tl_epochs=self.tl_epochs, burst_len=self.burst_len, tl_buffer=self.tl_buffer,
                            reference_mode=self.reference_mode, flux_correction=self.flux_correction,
                            snapshot_cadence=self.snapshot_cadence, initial_steps=self.initial_steps,
                            initial_epochs=self.initial_epochs, batch_size=self.batch_size)

    def pcg_settings(self) -> PcgSettings:
        return PcgSettings(tol=self.pcg_tol, max_iter=self.pcg_max_iter, preconditioner=self.preconditioner)

    def model_options(self) -> dict:
        if self.kind == 'FVMN':
            return dict(hidden=self.hidden, n_hidden=self.n_hidden, dropout=self.dropout,
                        batch_norm=self.batch_norm)
        return dict(width=self.width, modes=self.modes, n_layers=self.n_layers, activation=self.activation,
                    dropout=self.dropout, batch_norm=self.batch_norm)

    def replace(self, **overrides) -> 'BaseConfig':
        """ Plain (picklable) copy with some keys changed, validated again. """
        clone = BaseConfig()
        for keys in SCHEMA.values():
            for key in keys:
                setattr(clone, key, getattr(self, key))
        clone.source = self.source
        for key, value in overrides.items():
            if not any(key in keys for keys in SCHEMA.values()):
                raise ConfigError('unknown configuration key', key=key)
            setattr(clone, key, value)
        return clone.validate()
