class InteractionKitError(Exception):
    """Base class for errors raised by interactionkit."""


class ParameterError(InteractionKitError, ValueError):
    """An argument is outside the supported domain."""


class GameFormatError(InteractionKitError, ValueError):
    """A game or estimate file does not conform to its text format."""


class BudgetExceededError(InteractionKitError, RuntimeError):
    """The oracle's evaluation budget is exhausted; the caller must stop sampling."""
