"""Exception types shared across the package.

Configuration problems raise :class:`ConfigError`; failures during time
integration raise one of the :class:`SimulationError` subclasses.  The CLI
maps the former to exit code 2 and the latter to exit code 3.
"""


class ConfigError(ValueError):
    """Invalid scenario configuration or malformed input data."""


class SimulationError(RuntimeError):
    """Base class for runtime failures during a simulation."""


class BlowUpError(SimulationError):
    """Non-finite values appeared in the evolved state."""


class SingularConfigurationError(SimulationError):
    """Peakon positions closer than the minimum resolvable gap."""


class ConditioningError(SimulationError):
    """Kernel matrix too ill-conditioned for a reliable solve."""
