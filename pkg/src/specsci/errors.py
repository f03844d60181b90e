"""Exception types; the CLI maps them onto exit codes."""


class ParameterError(ValueError):
    """Invalid parameters or operator spec (exit code 2)."""


class NumericalError(ArithmeticError):
    """A numerical precondition failed (exit code 3)."""


class IllConditionedRootsError(NumericalError):
    pass


class NotInResolventDomainError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class Inconclusive(Exception):
    """A semi-decision procedure ran out of budget (exit code 4)."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}
