"""Exception hierarchy shared across the package."""


class PmonoError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(PmonoError):
    """Operands live on different grids or have mismatched channel counts."""


class ConfigurationError(PmonoError):
    """Invalid run configuration (bad waveform, step sizes, missing data)."""


class LawError(PmonoError, ValueError):
    """An element law violates its monotonicity or parameter constraints."""


class ParseError(PmonoError):
    """Malformed netlist or problem document, with 1-based location."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            where = f"line {line}" + (f", col {column}" if column is not None else "")
            message = f"{where}: {message}"
        super().__init__(message)


class NoRepresentationError(PmonoError):
    """No hybrid representation exists for the requested partition(s)."""


class DivergenceError(PmonoError):
    """The iteration produced a non-finite iterate."""

    def __init__(self, message, iteration=None):
        self.iteration = iteration
        super().__init__(message)


class NumericalError(PmonoError):
    """A linear solve failed or was too ill-conditioned to trust."""
