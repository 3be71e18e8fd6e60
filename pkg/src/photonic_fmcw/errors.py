"""Exception types raised across the simulator."""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class NyquistViolation(SimulationError):
    pass


class MismatchedGrids(SimulationError):
    pass


class IndexOutOfRange(SimulationError):
    """Modulation index outside the small-signal window."""


class InvalidCutoff(SimulationError):
    pass


class EmptyBand(SimulationError):
    pass


class RaggedInput(SimulationError):
    pass


class NotConverged(SimulationError):
    """Optimizer stopped without an interior optimum.

    The best point found so far is attached as ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(SimulationError):
    """Invalid experiment configuration; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
