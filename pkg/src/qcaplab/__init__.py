"""Desk-scale laboratory for zero-error and Holevo capacities of quantum channels."""

from ._version import __version__
from .channels import (
    CQChannel,
    DirectSumChannel,
    KrausChannel,
    MeasPrepChannel,
    QCChannel,
    orthomix,
    validate_cptp,
)
from .errors import DimensionCapError, InvariantError, QCapError, SizeCapError

__all__ = [
    "__version__",
    "CQChannel",
    "DirectSumChannel",
    "KrausChannel",
    "MeasPrepChannel",
    "QCChannel",
    "orthomix",
    "validate_cptp",
    "DimensionCapError",
    "InvariantError",
    "QCapError",
    "SizeCapError",
]
