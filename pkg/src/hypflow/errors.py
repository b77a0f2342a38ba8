"""Exception hierarchy shared by the solver modules."""


class HypflowError(Exception):
    """Base class for all package errors."""


class DomainError(HypflowError, ValueError):
    """An argument lies outside the domain of a function."""


class ConeViolationError(HypflowError):
    """A curvature vector left the admissible cone."""


class GeometryError(HypflowError):
    """Surface data cannot be turned into a hypersurface sample."""


class ParameterError(HypflowError, ValueError):
    """A model parameter is out of range."""


class InadmissibleInitialDataError(HypflowError):
    """Initial surface fails a hypothesis of the flow problem.

    ``node`` and ``quantity`` identify the first violation found.
    """

    def __init__(self, message, node=None, quantity=None, value=None):
        super().__init__(message)
        self.node = node
        self.quantity = quantity
        self.value = value


class StepFailureError(HypflowError):
    """Time step could not be made admissible after the allowed halvings."""


class PreconditionError(HypflowError):
    """A monitored quantity's precondition does not hold."""
