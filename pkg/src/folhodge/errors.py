"""Exception types shared across folhodge."""


class FolhodgeError(Exception):
    pass


class ModelValidationError(FolhodgeError):
    """A coframe model failed one of its admission gates."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SchemaError(FolhodgeError):
    """A model file does not match the expected schema."""


class NotClosedError(FolhodgeError, ValueError):
    """A one-form passed where a closed one is required."""


class DegreeError(FolhodgeError, ValueError):
    pass


class NumericalReliabilityError(FolhodgeError):
    """A harmonic/rank threshold sits inside an eigenvalue or singular value cluster."""


class TautnessMismatchError(FolhodgeError):
    """The spectral and potential-based tautness detectors disagree."""


class OrientationError(FolhodgeError, ValueError):
    """An operator needing the transversal star was requested on a non-oriented model."""
