"""Exception hierarchy shared by every module."""


class WimpyError(Exception):
    pass


class InvalidDistribution(WimpyError, ValueError):
    pass


class DimensionMismatch(WimpyError, ValueError):
    pass


class ZeroProbabilityLetter(WimpyError, ValueError):
    pass


class ZeroProbabilityCell(WimpyError, ValueError):
    pass


class ZeroMarginal(WimpyError, ValueError):
    pass


class TooManyClasses(WimpyError):
    pass


class QuadratureFailure(WimpyError):
    pass


class NonFiniteInput(WimpyError, ValueError):
    pass


class NotPositiveDefinite(WimpyError, ValueError):
    pass


class DegenerateDirection(WimpyError, ValueError):
    pass


class NoInteriorMax(WimpyError, ValueError):
    pass


class NonConvergence(WimpyError):
    pass


class UFactorDomain(WimpyError, ValueError):
    pass


class DegenerateEntropyDelta(WimpyError, ZeroDivisionError):
    pass


class DegenerateDenominator(WimpyError, ZeroDivisionError):
    pass


class DegenerateAlpha2(WimpyError, ZeroDivisionError):
    pass


class DegenerateT(WimpyError, ZeroDivisionError):
    pass


class NonFiniteState(WimpyError, FloatingPointError):
    pass


class RGBreakdown(WimpyError):
    """Unphysical value met during an RG pass.

    Carries where it happened so sweeps can map the breakdown window.
    """

    def __init__(self, message, cycle=None, s=None, quantity=None, value=None):
        super().__init__(message)
        self.cycle = cycle
        self.s = s
        self.quantity = quantity
        self.value = value


class NoConvergence(WimpyError):
    """Cycle limit exhausted; the partial result rides along."""

    def __init__(self, message, state=None, report=None):
        super().__init__(message)
        self.state = state
        self.report = report
