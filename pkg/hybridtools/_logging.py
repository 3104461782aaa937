""" Package-wide logger helpers. """

import logging

_ROOT_NAME = 'hybridtools'
_FORMAT = '%(asctime)s | %(levelname)s | %(message)s'
_DATEFMT = '%Y-%m-%d %H:%M:%S'

LOGGER = logging.getLogger(_ROOT_NAME)
LOGGER.addHandler(logging.NullHandler())


def get_logger(name: str) -> logging.Logger:
    """ Return a child of the package logger, e.g. `hybridtools.solver`. """
    if name.startswith(_ROOT_NAME):
        return logging.getLogger(name)
    return LOGGER.getChild(name)


def setup_logging(level=logging.INFO) -> logging.Logger:
    """ Attach a single stream handler to the package logger.

    Calling this twice does not duplicate output.
    """
    if not any(isinstance(h, logging.StreamHandler) and not isinstance(h, logging.NullHandler)
               for h in LOGGER.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_FORMAT, _DATEFMT))
        LOGGER.addHandler(handler)
    LOGGER.setLevel(level)
    return LOGGER
