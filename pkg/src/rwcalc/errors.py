"""Exception hierarchy shared by all rwcalc modules."""


class RWCalcError(Exception):
    """Base class for every error raised by rwcalc."""


class InsufficientBridges(RWCalcError, ValueError):
    """A raw walk has fewer complete bridges than the coarser walk has steps."""


class StepBudgetExceeded(RWCalcError, RuntimeError):
    """The hard cap on raw steps per level was hit before the horizon."""


class OutOfHorizon(RWCalcError, ValueError):
    """A time or index lies beyond what the constructed object covers."""


class OffLattice(RWCalcError, ValueError):
    """A point required to lie on a lattice does not."""


class BeyondTotalQV(RWCalcError, ValueError):
    """Inverse time change requested beyond the quadratic variation available."""


class InvalidConfig(RWCalcError, ValueError):
    """An experiment configuration violates its invariants."""


class InsufficientData(RWCalcError, ValueError):
    """Not enough levels to estimate a convergence rate."""


class NonPositiveMetric(RWCalcError, ValueError):
    """A metric that must be logged is zero or negative."""
