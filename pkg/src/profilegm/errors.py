"""Exception hierarchy shared by every module."""


class ProfileGMError(Exception):
    """Base class for all package errors."""


class InputError(ProfileGMError, ValueError):
    """Malformed or inconsistent user input (unknown vertex, bad file, ...)."""


class CapacityError(InputError):
    """An enumeration would exceed its configured size cap."""


class NumericalError(ProfileGMError, ArithmeticError):
    """A numerical routine failed (non-PD matrix, non-finite density, ...)."""


class GenerationError(ProfileGMError, RuntimeError):
    """The simulation generator could not produce a valid instance."""
