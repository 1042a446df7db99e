"""Exception hierarchy shared by the estimation, diagnostics and CLI layers."""

from typing import Optional


class WemixError(Exception):
    """Base class for every error raised on purpose by wemix."""


class DomainError(WemixError, ValueError):
    """An argument lies outside the domain of a function."""


class SingularCovariance(WemixError):
    """A covariance matrix has a vanishing smallest eigenvalue."""


class BoundarySingularity(DomainError):
    """A density is unbounded at the evaluation point (chi-square, 1 dof, t=0)."""


class EmptySample(WemixError, ValueError):
    """A kernel density estimate was requested from no samples."""


class ReferenceDensityZero(WemixError):
    """The chi-square reference density underflowed at a squared distance."""


class DegenerateComponent(WemixError):
    """A component lost (almost) all of its weighted mass."""


class AllRootsDegenerate(WemixError):
    """Every candidate root was discarded by root selection."""


class TooFewRows(WemixError, ValueError):
    """Not enough observations to initialise the requested mixture."""


class FewerThanTwoPoints(WemixError, ValueError):
    """A pair-counting index needs at least two points."""


class KMismatch(WemixError, ValueError):
    """Fitted and reference mixtures disagree on the number of components."""


class DimensionTooSmall(WemixError, ValueError):
    """The requested dimension is below what the generator supports."""


class RejectionBudgetExceeded(WemixError):
    """Rejection sampling of outliers ran out of attempts."""


class GridTooSmall(WemixError, ValueError):
    """A monitoring grid has too few cells to locate a changepoint."""


class InputError(WemixError, ValueError):
    """Malformed user input (CSV data, option strings, config files)."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
