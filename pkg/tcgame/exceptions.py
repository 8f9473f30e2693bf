"""Error hierarchy for the transport-choice game library."""


class TcGameError(Exception):
    """Base class for every error raised by the tcgame library."""


class DomainError(TcGameError, ValueError):
    """An argument lies outside the domain of the operation."""


class DimensionError(TcGameError, ValueError):
    """Vector lengths disagree with each other or with the game size."""


class ConvergenceError(TcGameError, ArithmeticError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, iterations, residual):
        super().__init__(f"{message} (iterations={iterations}, residual={residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class EmptyCoalitionError(TcGameError, ValueError):
    """An operation that needs at least one player received the empty coalition."""


class GameSizeError(TcGameError, ValueError):
    """The player count exceeds the dense enumeration bound."""


class GameKindError(TcGameError, ValueError):
    """A plain game was required, or a delta game would be scaled twice."""


class DegenerateAllocationError(TcGameError, ArithmeticError):
    """A rule or threshold is undefined for this game (vanishing denominator)."""


class ExperimentAbortedError(TcGameError, RuntimeError):
    """Situation generation failed too many times in a row."""
