"""Exceptions shared by the convexdisk engines."""


class ConvexDiskError(Exception):
    """Base class for all package errors."""


class DomainError(ConvexDiskError):
    """An argument lies outside the mathematical domain of the operation."""


class SingularityError(ConvexDiskError):
    """The singular integration received an input it cannot integrate in
    closed form: the integrand does not vanish fast enough at 0, or a
    logarithmic term survives the reduction.  This signals a malformed
    input, not a tolerance problem; the computation is exact."""


class TermBudgetExceeded(ConvexDiskError):
    """A canonical form grew past the configured term budget."""


class ToleranceNotMet(ConvexDiskError):
    """The adaptive integrator hit its subdivision limit before reaching
    the requested tolerance."""
