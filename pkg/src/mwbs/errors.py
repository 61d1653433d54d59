"""Exception types shared across the package."""


class Error(Exception):
    """Base class for all package errors."""


class FormatError(Error):
    """A document does not follow the expected grammar."""


class EmbeddingError(Error):
    """A rotation system violates a structural invariant (self-loop,
    dart bookkeeping, or the genus-0 Euler check)."""


class DecompositionError(Error):
    """A branch decomposition is unusable for the requested operation."""


class BuildError(Error):
    """A decomposition builder failed; carries the offending instance
    document so the case can be kept as a regression fixture."""

    def __init__(self, message, instance_document=None):
        super().__init__(message)
        self.instance_document = instance_document


class BudgetExceeded(Error):
    """An exhaustive oracle was asked to enumerate beyond its budget."""


class NotAStar(Error):
    """star_solve was handed a graph that is not a star."""
