"""Exception types used across the simulator."""


class ConfigError(ValueError):
    """Invalid scenario/configuration input (bad key, bad bound, malformed file)."""


class GeometryError(ValueError):
    """Degenerate or out-of-band geometric input."""


class BelowHorizonError(GeometryError):
    """Atmospheric attenuation requested for a satellite at or below the horizon."""


class SingularInformationError(ArithmeticError):
    """Fisher information matrix is (numerically) singular: geometry not localizable."""
