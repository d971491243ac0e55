"""Exception types shared across the simulator."""


class SimulationError(Exception):
    """Base class for simulator errors."""


class ConfigError(SimulationError, ValueError):
    """Invalid scenario or experiment configuration."""


class DegenerateChannelError(SimulationError):
    """A channel draw cannot be precoded (singular Gram matrix, zero column).

    The Monte Carlo harness catches this and redraws the realization.
    """


class RankDeficiencyError(DegenerateChannelError):
    """Gram matrix of a pseudo-inverse is numerically singular."""


class DegenerateStepError(SimulationError):
    """Retraction hit a zero entry and step halving did not recover."""
