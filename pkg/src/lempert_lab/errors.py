"""Exception hierarchy shared by all modules."""


class LabError(Exception):
    """Base class for every error raised by the library."""


class ArgumentError(LabError, ValueError):
    """An argument violates a documented precondition."""


class RangeError(ArgumentError):
    """A parameter is outside the range where a construction is valid."""


class CapabilityError(LabError):
    """The requested operation is not available for this domain variant."""


class ConstructionError(LabError):
    """A construction could not be verified (carries an optional witness)."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NumericError(LabError, ArithmeticError):
    """A numerical evaluation produced non-finite values."""


class ComputationError(LabError):
    """An optimizer or search failed to produce a usable result."""
