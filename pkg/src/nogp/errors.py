"""Exception types raised across the package."""


class NogpError(Exception):
    """Base class for all errors raised by :mod:`nogp`."""


class NonHermitianInput(NogpError, ValueError):
    pass


class NonHermitianSample(NonHermitianInput):
    """A driven Hamiltonian returned a non-Hermitian matrix at some time."""


class DegenerateClustering(NogpError, ValueError):
    pass


class DimensionMismatch(NogpError, ValueError):
    pass


class GridMismatch(NogpError, ValueError):
    pass


class GridTooCoarse(NogpError, ValueError):
    pass


class NotUnitary(NogpError, ValueError):
    pass


class NotCyclic(NogpError):
    """Spectral projections do not return to themselves after one period."""


class NotCyclicSubspace(NogpError):
    pass


class NotClosed(NogpError, ValueError):
    """A loop frame does not return to its starting point."""


class NotClosedBase(NogpError, ValueError):
    pass


class ToleranceNotMet(NogpError, ArithmeticError):
    pass


class NotCyclicWarning(UserWarning):
    pass


class StepTooCoarse(UserWarning):
    """Two sign changes of xi were found inside one scan step."""
