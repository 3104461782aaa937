import importlib.util
import traceback
import os.path as osp

from ..exceptions import ConfigError
from .base_config import SCHEMA, BaseConfig


def load_python_config(config_file):
    """ Import a settings module from its file path. """
    if not osp.exists(config_file):
        raise ConfigError(f"config file '{config_file}' not found")
    parent = osp.dirname(osp.abspath(config_file))
    basename = osp.splitext(osp.basename(config_file))[0]
    spec = importlib.util.spec_from_file_location(basename, osp.join(parent, osp.basename(config_file)))
    module = importlib.util.module_from_spec(spec)
    try:
        spec.loader.exec_module(module)
    except Exception as e:
        frames = traceback.extract_tb(e.__traceback__)
        lineno = frames[-1].lineno if frames else None
        raise ConfigError(f'failed to load settings module: {e}', lineno=lineno) from e
    return module


class PythonConfig(BaseConfig):
    """ Case configuration from a Python settings module.

    The module defines one dict per section, e.g. `grid = dict(extents=[64, 64])`.
    """

    def __init__(self, config_file):
        super().__init__()
        self.source = config_file
        self._setting_module = load_python_config(config_file)
        self._load()
        self.validate()

    def _load(self):
        provided = {}
        for section in SCHEMA:
            values = getattr(self._setting_module, section, None)
            if values is None:
                continue
            if not isinstance(values, dict):
                raise ConfigError(f'section {section} must be a dict, got {type(values).__name__}')
            provided[section] = values
            self._apply(section, values)
        self._require(provided)
