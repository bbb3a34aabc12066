"""Exception hierarchy shared by all modules."""


class MQ2LabError(Exception):
    """Base class for every error raised by mq2lab."""


class ContractError(MQ2LabError, ValueError):
    """An argument violates an operation's precondition."""


class DimensionRefusal(ContractError):
    """A requested dimension exceeds the configured memory/time cap."""


class KindError(ContractError):
    """A family was used with the wrong kind (e.g. complex entry in a stochastic family)."""


class NumericError(MQ2LabError, ArithmeticError):
    """A non-finite value appeared during a matrix-vector product."""

    def __init__(self, message, source=None, destination=None):
        super().__init__(message)
        self.source = source
        self.destination = destination
