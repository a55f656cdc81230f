class MechkitError(Exception):
    """Base class for errors raised by mechkit."""


class InputError(MechkitError, ValueError):
    """Malformed environment, profile, option, rule or payment specification."""


class CapacityError(MechkitError):
    """An exhaustive computation would exceed its configured size cap."""


class UnsupportedError(MechkitError):
    """Operation not defined for this kind of environment or rule."""


class NegativeCycleError(MechkitError):
    """A type graph contains a negative directed cycle.

    This can only happen when the option rule is neither socially efficient
    nor an affine maximizer.
    """

    def __init__(self, agent=None, message="negative directed cycle in type graph"):
        self.agent = agent
        if agent is not None:
            message = f"{message} (agent {agent})"
        super().__init__(message)


class DominanceError(MechkitError, AssertionError):
    """A payment-ordering guarantee failed on a concrete instance."""


class AuditError(MechkitError, AssertionError):
    """An exhaustive spot audit found SE, DSIC or IR violations."""
