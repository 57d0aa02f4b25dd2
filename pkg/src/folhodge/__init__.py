"""Twisted basic cohomology of Riemannian foliations on reduced coframe models."""

from .errors import (
    DegreeError,
    FolhodgeError,
    ModelValidationError,
    NotClosedError,
    NumericalReliabilityError,
    OrientationError,
    SchemaError,
    TautnessMismatchError,
)
from .model import ActiveAxis, BasicForm, CoframeModel, ValidationReport, load_model, save_model, validate

__version__ = "0.1.0"

__all__ = [
    "ActiveAxis",
    "BasicForm",
    "CoframeModel",
    "DegreeError",
    "FolhodgeError",
    "ModelValidationError",
    "NotClosedError",
    "NumericalReliabilityError",
    "OrientationError",
    "SchemaError",
    "TautnessMismatchError",
    "ValidationReport",
    "load_model",
    "save_model",
    "validate",
]
