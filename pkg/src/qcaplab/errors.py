"""Exception types shared across the package."""


class QCapError(Exception):
    """Base class for library errors."""


class DimensionCapError(QCapError, ValueError):
    """A construction would exceed the configured dimension cap."""


class InvariantError(QCapError, ValueError):
    """A value violates one of its validity invariants."""


class SizeCapError(QCapError, ValueError):
    """An exact solver was asked to run above its certified size cap."""
