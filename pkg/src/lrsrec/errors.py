"""Exception types shared across the package."""


class LrsError(Exception):
    """Base class for all package errors."""


class DimensionError(LrsError):
    """Shapes of the inputs are inconsistent or out of range."""


class ParameterError(LrsError):
    """A configuration value or operator parameter is out of its valid range."""


class NumericalError(LrsError):
    """A numerical routine failed or produced non-finite values."""


class DivergenceError(NumericalError):
    """The solver produced a non-finite objective; message names the iteration."""


class ParseError(LrsError):
    """A matrix or trace file could not be parsed; message carries the byte offset."""
