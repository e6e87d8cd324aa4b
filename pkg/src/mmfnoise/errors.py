"""Exception and warning classes shared by all modules."""


class MmfError(Exception):
    """Base class for all errors raised by mmfnoise."""


class DomainError(MmfError, ValueError):
    """An argument lies outside the domain of the operation."""


class NumericError(MmfError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance.

    ``estimate`` and ``error_bound`` carry the best available result when the
    failing routine has one (quadrature, series summation).
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class FitError(MmfError, ValueError):
    """A regression could not be performed or gave an unusable result."""


class EstimationError(MmfError, ValueError):
    """A statistical estimator received insufficient or degenerate data."""


class OptimizationError(MmfError, RuntimeError):
    """A minimizer found no interior optimum."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(MmfError, ValueError):
    """Invalid run configuration; carries the offending key and line."""

    def __init__(self, message, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.key = key
        self.line = line


class SchemaError(MmfError, ValueError):
    """A CSV file lacks a column required by the consumer."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class NumericWarning(UserWarning):
    """Recoverable numerical issue (e.g. clipped embedding eigenvalues)."""


class AdiabaticityWarning(UserWarning):
    """The Hurst profile varies too fast for the locally stationary kernels."""
