"""Exception hierarchy shared across the package."""


class CapotError(Exception):
    """Base class for all errors raised by this package."""


class InputError(CapotError):
    """Malformed problem data: bad dimensions, invalid densities, unparsable files."""


class DimensionMismatch(InputError):
    """Operands whose grid shapes do not agree."""


class InfeasibleError(CapotError):
    """The instance admits no feasible transport plan.

    Carries the certificate (a capacity-violating rectangle) when available.
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class InvalidPlanError(CapotError):
    """A transport plan violates its capacity or marginal invariants."""


class TooLargeError(CapotError):
    """Instance exceeds the size limit of an exhaustive oracle."""


class IterationLimitError(CapotError):
    """A solver hit its pivot or iteration cap without terminating."""


class CoercivityError(CapotError):
    """A coercivity inequality that is a theorem under its hypotheses failed.

    Indicates an implementation bug, not a property of the instance.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics
