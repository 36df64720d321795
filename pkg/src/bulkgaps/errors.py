"""Exception types shared across the package."""


class BulkGapsError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(BulkGapsError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class PrecisionError(BulkGapsError, ArithmeticError):
    """A numerical procedure failed to reach its accuracy target."""


class UnsupportedDegeneracyError(BulkGapsError):
    """The density is too flat at a minimizer (all derivatives up to order 4 vanish)."""


class NumericalError(BulkGapsError, ArithmeticError):
    """An iterative method did not converge."""


class SizeError(BulkGapsError, ValueError):
    """A problem size exceeds what an (intentionally brute-force) routine supports."""


class PreconditionError(BulkGapsError, ValueError):
    """A documented precondition of the routine does not hold."""


class ConfigError(BulkGapsError, ValueError):
    """An experiment or CLI configuration is invalid."""
