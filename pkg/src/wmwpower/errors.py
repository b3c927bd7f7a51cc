"""Exception hierarchy shared across the package."""


class WMWPowerError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(WMWPowerError, ValueError):
    """A distribution or design parameter is outside its domain."""


class DomainError(WMWPowerError, ValueError):
    """A probability, statistic or similar argument is out of range."""


class NumericalError(WMWPowerError, ArithmeticError):
    """Quadrature, root finding or a variance computation failed."""


class TieError(WMWPowerError):
    """Cross-group ties were found; the continuous-data test does not handle them."""


class CapabilityError(WMWPowerError):
    """The request exceeds a configured limit (for example the exact-table size)."""
