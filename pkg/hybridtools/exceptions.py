""" Exception types raised across the package. """


class HybridToolsError(Exception):
    """ Base class of every error raised on purpose by hybridtools. """


class ConfigError(HybridToolsError, ValueError):
    """ Invalid or incomplete case configuration.

    Args:
        message (str): Human readable reason.
        key (str, optional): Offending configuration key.
        lineno (int, optional): Line number in the config file, if known.
    """

    def __init__(self, message, key=None, lineno=None):
        self.message = message
        self.key = key
        self.lineno = lineno
        prefix = ''
        if lineno is not None:
            prefix += f'line {lineno}: '
        if key is not None:
            prefix += f"'{key}': "
        super().__init__(prefix + message)


class GridError(HybridToolsError, ValueError):
    """ Invalid grid extents, lengths or sample points. """


class SnapshotFormatError(HybridToolsError, ValueError):
    """ Snapshot or checkpoint file is corrupt, truncated or incompatible. """


class CFLViolationError(HybridToolsError, RuntimeError):
    """ Explicit time step exceeds the convective stability limit. """

    def __init__(self, cfl, limit):
        self.cfl = cfl
        self.limit = limit
        super().__init__(f'CFL number {cfl:.4g} exceeds limit {limit:.4g}, reduce dt')


class ConvergenceError(HybridToolsError, RuntimeError):
    """ Iterative linear solve failed to reach its tolerance (or produced NaN). """

    def __init__(self, message, iterations=None, residual=None):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f'{message} (iterations={iterations}, residual={residual})')


class SurrogateDivergenceError(HybridToolsError, RuntimeError):
    """ Surrogate produced a non-finite or non-physical state. """


class MissingGroundTruthError(HybridToolsError, LookupError):
    """ Benchmark needs a reference trajectory that is not available. """
