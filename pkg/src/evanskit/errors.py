"""Exception types shared across the package.

Two broad groups: contract errors (bad inputs, caller mistakes) and
numerical errors (the computation itself reported an obstruction).  The
command line maps the first group to exit code 2 and the second to 3.
"""


class EvansKitError(Exception):
    """Base class for everything raised on purpose by this package."""


class ContractError(EvansKitError, ValueError):
    """A documented precondition was violated by the caller."""


class ConfigError(ContractError):
    """Invalid or inconsistent configuration input.

    ``field`` holds a dotted path to the offending key when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class RankDeficientError(ContractError):
    """Columns handed to an orthonormalization were (numerically) dependent."""

    def __init__(self, message, smallest_singular_value):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value


class NumericalError(EvansKitError, RuntimeError):
    """Base class for failures detected during a computation."""


class HyperbolicityError(NumericalError):
    """A matrix that must be hyperbolic has spectrum too close to the
    imaginary axis, or the sign iteration failed to settle.

    ``witness`` carries the offending real part or the last residual.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class StiffnessError(NumericalError):
    """Adaptive step control collapsed (underflow or step budget).

    ``t`` is the time at which integration gave up.
    """

    def __init__(self, message, t):
        super().__init__(message)
        self.t = t


class ContinuityError(NumericalError):
    """Adjacent parameter nodes are too far apart for reliable alignment;
    the parameter grid needs refinement.  ``edges`` lists offenders."""

    def __init__(self, message, edges):
        super().__init__(message)
        self.edges = list(edges)


class TransversalityError(NumericalError):
    """An operation required a transversal subspace pair and did not get one.

    ``margin`` is the measured smallest singular value.
    """

    def __init__(self, message, margin):
        super().__init__(message)
        self.margin = margin
