"""Exception types shared across the simulator."""


class SarsimError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SarsimError, ValueError):
    """A numeric argument lies outside its physical domain (d <= 0, f <= 0, ...)."""


class InvalidStartError(SarsimError, ValueError):
    """An episode was asked to start from a blocked or out-of-bounds cell."""


class UnknownStateError(SarsimError, LookupError):
    """An RSS value or cell has no matching state in the state space."""


class StateUniquenessError(SarsimError):
    """Two free cells share the same quantized RSS, so states cannot be labeled."""


class NoActionAvailableError(SarsimError):
    """Every one of the eight actions is forbidden for the current state."""


class NonTerminationError(SarsimError):
    """Value iteration failed to converge within the sweep budget."""


class InvalidTrajectoryError(SarsimError, ValueError):
    """Consecutive trajectory positions do not differ by a legal move."""


class ParseError(SarsimError):
    """A scenario file or config mapping is malformed (syntax, type, unknown key)."""


class ValidationError(SarsimError):
    """A well-formed config violates a semantic constraint."""


class QTableMismatchError(ValidationError):
    """A loaded Q-table does not fit the scenario's state space."""
