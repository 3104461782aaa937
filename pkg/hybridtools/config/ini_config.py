import configparser
import os.path as osp
import re

from ..exceptions import ConfigError
from .base_config import SCHEMA, BaseConfig


class INIConfig(BaseConfig):
    """ Case configuration from a sectioned `key = value` file.

    Sections are [grid], [physics], [boundary], [hybrid], [training], [model] and
    [output]; omitted optional keys keep their defaults.
    """

    def __init__(self, config_file):
        super().__init__()
        if not osp.exists(config_file):
            raise ConfigError(f"config file '{config_file}' not found")
        self.source = config_file
        with open(config_file, 'r') as file:
            self._lines = file.read().splitlines()

        self._parser = configparser.ConfigParser(inline_comment_prefixes=('#', ';'), interpolation=None)
        try:
            self._parser.read_string('\n'.join(self._lines), source=config_file)
        except configparser.MissingSectionHeaderError as err:
            raise ConfigError("key outside of any [section]", lineno=err.lineno) from None
        except configparser.ParsingError as err:
            lineno, line = err.errors[0]
            raise ConfigError(f"cannot parse {line!r}", lineno=lineno) from None
        except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as err:
            raise ConfigError(err.message.split(':')[-1].strip(), lineno=err.lineno) from None

        self._load()
        self.validate()

    def _locate(self, key):
        if key is None:
            return None
        pattern = re.compile(rf'^\s*{re.escape(key)}\s*[=:]')
        for lineno, line in enumerate(self._lines, start=1):
            if pattern.match(line):
                return lineno
        return None

    def _load(self):
        provided = {}
        for section in self._parser.sections():
            if section not in SCHEMA:
                raise ConfigError(f'unknown section [{section}]', lineno=self._locate_section(section))
            provided[section] = dict(self._parser.items(section))
            self._apply(section, provided[section])
        self._require(provided)

    def _locate_section(self, section):
        for lineno, line in enumerate(self._lines, start=1):
            if line.strip() == f'[{section}]':
                return lineno
        return None
