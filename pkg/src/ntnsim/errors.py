"""Exception types shared across the simulator."""


class NtnSimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(NtnSimError):
    """Invalid configuration value, file, or scenario definition."""


class PlacementInfeasibleError(NtnSimError):
    """Base-station rejection sampling exhausted its attempt budget."""


class ParameterRangeError(NtnSimError):
    """A derived model parameter left its physically valid range."""


class SimulationError(NtnSimError):
    """Unexpected failure while executing a simulation run."""
