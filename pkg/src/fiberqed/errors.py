"""Exception types shared across the package."""


class FiberQEDError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(FiberQEDError, ValueError):
    """An input lies outside the physically or numerically valid range."""


class ConfigError(FiberQEDError, ValueError):
    """A run configuration file or value is malformed."""


class SolverError(FiberQEDError, RuntimeError):
    """A root search or linear solve failed or is untrustworthy."""


class ConvergenceError(FiberQEDError, RuntimeError):
    """An adaptive sum or quadrature exhausted its budget before converging."""
