"""Exception hierarchy shared by every module of the package."""


class QfiError(Exception):
    """Base class for all package errors."""


class NotHermitian(QfiError, ValueError):
    pass


class NoConvergence(QfiError, RuntimeError):
    pass


class DimensionMismatch(QfiError, ValueError):
    pass


class OutOfRange(QfiError, ValueError):
    """A physical parameter lies outside its closed domain."""


class DomainError(QfiError, ValueError):
    pass


class InvalidChannel(QfiError, ValueError):
    """Kraus operators fail the completeness relation."""


class DegeneracyUnresolved(QfiError, ArithmeticError):
    """First-order perturbation theory cannot fix the eigenvector gauge.

    Raised by the three-term decomposition when a degenerate eigenspace
    stays degenerate after projecting the derivative onto it and the
    second-order couplings that would split it are not negligible.
    """


class NotTwoDimensional(QfiError, ValueError):
    pass


class SweepDegraded(QfiError, RuntimeError):
    """More than the tolerated fraction of sweep cells failed."""
