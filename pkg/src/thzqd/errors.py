"""Exception classes shared across the package."""


class ConfigurationError(ValueError):
    """Invalid physical parameters, geometry, grid or run configuration."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or broke an accuracy guard."""


class ResonanceUnreachable(NumericalError):
    """A transition cannot be tuned to the requested energy on the map."""

    def __init__(self, message, energy_range=None):
        super().__init__(message)
        self.energy_range = energy_range


class DivisionHazard(NumericalError):
    """A perturbative denominator vanished at the chosen operating point."""
