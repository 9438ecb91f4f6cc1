"""Exception types raised across the package."""


class ValidationError(ValueError):
    """Invalid user input (bad vector entry, mismatched dimension, ...)."""


class DomainError(ValueError):
    """A mathematical hypothesis required by an operation is violated."""


class NyquistError(ValueError):
    """Sampling grid too coarse for the band limit of the content."""

    def __init__(self, message, required_n=None):
        super().__init__(message)
        self.required_n = required_n


class NumericalConsistencyError(RuntimeError):
    """A numerical self-check (e.g. imaginary residue of a real transform) failed."""


class ToleranceError(RuntimeError):
    """A requested error tolerance could not be reached within the allowed effort."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved
