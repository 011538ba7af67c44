"""Exception hierarchy shared by all modules."""


class BertrandError(Exception):
    """Base class for library errors."""


class DomainError(BertrandError, ValueError):
    """Input lies outside the domain where an operation is defined."""


class ConstraintError(DomainError):
    """A potential or parameter violates a sign or compatibility constraint."""


class PreconditionError(DomainError):
    """Hypotheses of a check are not satisfied (e.g. rho vanishes)."""


class NumericalFailure(BertrandError, RuntimeError):
    """An iterative or adaptive procedure failed to converge.

    ``partial`` carries whatever result was obtained before the failure.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
