import os.path as osp

from ..exceptions import ConfigError
from .base_config import BaseConfig, OUTPUT_ROOT_ENV, SCHEMA
from .ini_config import INIConfig
from .python_config import PythonConfig, load_python_config


def load_config(path) -> BaseConfig:
    """ Load and validate a case file; `.py` is a settings module, `.cfg`/`.ini` a sectioned file. """
    suffix = osp.splitext(path)[1].lower()
    if suffix == '.py':
        return PythonConfig(path)
    if suffix in ('.cfg', '.ini'):
        return INIConfig(path)
    raise ConfigError(f"unsupported config format '{suffix}' of {path}")


__all__ = ['BaseConfig', 'INIConfig', 'PythonConfig', 'load_config', 'load_python_config',
           'OUTPUT_ROOT_ENV', 'SCHEMA']
