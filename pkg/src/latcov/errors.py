"""Exception types raised across the package."""


class LatcovError(Exception):
    """Base class for all package errors."""


class NotPositiveDefinite(LatcovError, ValueError):
    pass


class ZeroVector(LatcovError, ValueError):
    pass


class CutoffTooSmall(LatcovError, ValueError):
    pass


class CutoffMismatch(LatcovError, ValueError):
    pass


class CutoffTooSmallForH(LatcovError, ValueError):
    pass


class NonPositiveTime(LatcovError, ValueError):
    pass


class GridTooCoarse(LatcovError, ValueError):
    pass


class GridMismatch(LatcovError, ValueError):
    pass


class EmptySamples(LatcovError, ValueError):
    pass


class UnclassifiedCase(LatcovError, ValueError):
    pass


class FactorizationFailure(LatcovError, ArithmeticError):
    pass


class PrincipalCharacter(LatcovError, ValueError):
    pass


class SquareCase(LatcovError, ValueError):
    """3ab' is a perfect square; the N log N constant applies instead."""

    def __init__(self, message: str, square_constant: float):
        super().__init__(message)
        self.square_constant = square_constant


class UnhandledCase(LatcovError, ValueError):
    pass


class BudgetExceeded(LatcovError, ValueError):
    pass
