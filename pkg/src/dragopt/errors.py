"""Exception hierarchy shared across the toolkit.

UsageError maps to CLI exit code 1, NumericalError to exit code 2.
"""


class DragoptError(Exception):
    """Base class for all toolkit errors."""


class UsageError(DragoptError):
    """Bad arguments, malformed config or input files."""


class NumericalError(DragoptError):
    """Solver divergence, factorization failure, non-finite values."""


class ShapeError(DragoptError):
    """Invalid or degenerate geometry (self-intersection, zero extent, ...)."""


class ExtractionError(ShapeError):
    """Contour recovery from an image failed (empty, multiple components, ...)."""
