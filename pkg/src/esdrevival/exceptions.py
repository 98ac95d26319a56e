"""Exception hierarchy. CLI exit codes hang off the three top-level families."""


class ESDRevivalError(Exception):
    """Base class for all package errors."""


class ConfigError(ESDRevivalError, ValueError):
    """Invalid configuration or model parameters (CLI exit code 2)."""

    def __init__(self, message, *, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


class NonPhysicalChannelError(ConfigError):
    """A dephasing parameter with modulus above one."""


class ProtocolError(ConfigError):
    """Tomography data that does not cover the measurement protocol."""


class NumericError(ESDRevivalError, ArithmeticError):
    """Numerical failure (CLI exit code 3)."""


class EigenSolverError(NumericError):
    pass


class DegenerateConditioningError(NumericError):
    """Conditioning on an outcome of (numerically) zero probability."""


class ConvergenceError(NumericError):
    """Optimizer ran out of budget. ``best`` carries the best iterate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class OutputError(ESDRevivalError, OSError):
    """File I/O failure (CLI exit code 4)."""
