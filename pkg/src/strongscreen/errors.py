"""Exception and warning types shared across the package."""


class StrongScreenError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(StrongScreenError, ValueError):
    """Vector or matrix dimensions are incompatible."""


class ConstantColumn(StrongScreenError, ValueError):
    """A zero-variance column was passed where scaling is required."""

    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column} has zero variance and cannot be scaled")


class DegenerateResponse(StrongScreenError, ValueError):
    """Binary response is all zeros or all ones."""


class InvalidCorrelation(StrongScreenError, ValueError):
    """Equi-correlation parameter outside the positive-definite range."""


class RankDeficient(StrongScreenError, ValueError):
    """Design matrix does not have full column rank."""


class InvalidSpec(StrongScreenError, ValueError):
    """Simulation specification fails its own invariants."""


class NonPSDInput(StrongScreenError, ValueError):
    """Covariance input is not symmetric positive semi-definite."""


class NotConverged(StrongScreenError, RuntimeError):
    """Iterative solver exhausted its sweep budget without converging."""


class MismatchedSolutions(StrongScreenError, RuntimeError):
    """Timing benchmark aborted: strategies disagreed on the solution."""


class MaxSweepsExceeded(RuntimeWarning):
    """Coordinate descent hit the sweep cap; best iterate was returned."""
