"""Exception hierarchy shared by all modules."""


class SteklovError(Exception):
    """Base class for every error raised by this package."""


class InvalidSpecError(SteklovError, ValueError):
    """A shape, graph or configuration description is malformed."""


class PreconditionError(SteklovError, ValueError):
    """An operation was called with arguments outside its domain."""


class DegenerateClosureError(SteklovError):
    """A component of the closure graph contains no boundary vertex.

    The interior block of the energy form is singular on that component, so
    harmonic extension and the Dirichlet-to-Neumann map are undefined.
    """

    def __init__(self, message, component=()):
        super().__init__(message)
        self.component = tuple(component)


class DisconnectedPairError(SteklovError, ValueError):
    """Effective resistance requested between different components."""


class NonSymmetricError(SteklovError, ValueError):
    pass


class InvalidTrialFamilyError(SteklovError, ValueError):
    """Trial functions fail the orthonormality or mean-zero constraint."""


class InvariantViolation(SteklovError, AssertionError):
    """An internal invariant that must always hold has failed.

    Raising this indicates a bug in the implementation, not bad input.
    """
