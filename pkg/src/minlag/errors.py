"""Exception hierarchy shared by all minlag modules."""


class MinlagError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(MinlagError):
    """Bad configuration or arguments (CLI exit code 1)."""


class NumericalError(MinlagError):
    """An iteration stagnated, produced NaN, or lost accuracy (CLI exit code 2)."""


class NonexistenceError(MinlagError):
    """Newton found no solution: the mathematically expected answer past the
    fold, not a malfunction (CLI exit code 3)."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class MeshQualityError(MinlagError):
    """Mesh violates a geometric sanity bound (degenerate triangle etc.)."""


class MeshMismatchError(MinlagError):
    """A field and an operator/mesh belong to different meshes."""


class ResourceLimitError(MinlagError):
    """Requested refinement exceeds the memory guard."""


class DomainError(MinlagError):
    """Input outside the mathematical domain of an operation."""


class AccuracyError(NumericalError):
    """Integrator step size too coarse for the requested invariant."""


class InadmissibleComponentError(MinlagError):
    """Integer data violating the stability inequalities of a moduli component."""
