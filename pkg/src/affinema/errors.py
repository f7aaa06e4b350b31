"""Exception hierarchy shared by every subpackage."""


class AffineMAError(Exception):
    """Base class for all errors raised by affinema."""


class DomainError(AffineMAError, ValueError):
    pass


class ApexNotInterior(DomainError):
    """The vertical vector is not strictly inside the cone."""


class NotOnBoundary(DomainError):
    pass


class RegionOutsideDomain(DomainError):
    pass


class AllInfinite(AffineMAError, ValueError):
    """Boundary data has no finite value."""


class EmptyInterior(AffineMAError, ValueError):
    pass


class OutsideSimplex(DomainError):
    pass


class OutsideBall(DomainError):
    pass


class ExponentOutOfRange(AffineMAError, ValueError):
    pass


class ExponentNotCritical(AffineMAError, ValueError):
    pass


class NonPositiveRHS(AffineMAError, ValueError):
    pass


class GridMismatch(AffineMAError, ValueError):
    pass


class SampleTooCloseToBoundary(AffineMAError, ValueError):
    pass


class DegenerateHessian(AffineMAError, ArithmeticError):
    pass


class NonNegativeValues(AffineMAError, ValueError):
    pass


class OutsideFoliatedRegion(AffineMAError, ValueError):
    pass


class Infeasible(AffineMAError, RuntimeError):
    pass


class NotConverged(AffineMAError, RuntimeError):
    """A solver stopped before reaching its tolerance.

    The partial :class:`~affinema.solver.SolveReport` is attached as
    ``report`` so callers can inspect the residual history.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SandwichViolated(AffineMAError, RuntimeError):
    def __init__(self, message, node=None, excess=None):
        super().__init__(message)
        self.node = node
        self.excess = excess


class MonotonicityViolated(AffineMAError, RuntimeError):
    pass


class ConfigError(AffineMAError, ValueError):
    pass


class ConfigParse(ConfigError):
    pass


class SchemaViolation(ConfigError):
    pass


class IoError(AffineMAError, OSError):
    pass
