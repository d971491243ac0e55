"""ICI-aware hybrid beamforming for multiuser massive MIMO-OFDM downlinks
in the terahertz band.

Submodules: :mod:`mathcore` (linear algebra and random streams),
:mod:`channel`, :mod:`ici`, :mod:`objectives`, :mod:`manifold`,
:mod:`precoding` and the experiment :mod:`harness`.
"""

from .errors import (
    ConfigError,
    DegenerateChannelError,
    DegenerateStepError,
    RankDeficiencyError,
    SimulationError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DegenerateChannelError",
    "DegenerateStepError",
    "RankDeficiencyError",
    "SimulationError",
    "__version__",
]
