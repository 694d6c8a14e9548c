"""Exception hierarchy shared by the solvers, extractors and the CLI."""

from __future__ import annotations


class RegimeVIError(Exception):
    """Base class for all package errors."""


class ParamError(RegimeVIError, ValueError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ParamOrderViolation(ParamError):
    """mu1 > rho > mu2 does not hold."""


class ParamRangeViolation(ParamError):
    """A scalar parameter is outside its admissible range."""


class DomainError(RegimeVIError, ValueError):
    pass


class SolverError(RegimeVIError):
    pass


class NewtonDivergence(SolverError):
    def __init__(self, residual: float, time_index: int | None = None):
        self.residual = residual
        self.time_index = time_index
        where = "" if time_index is None else f" at time index {time_index}"
        super().__init__(f"Newton failed to converge{where}; last residual {residual:.3e}")


class FixedPointStall(SolverError):
    def __init__(self, change: float, time_index: int | None = None):
        self.change = change
        self.time_index = time_index
        where = "" if time_index is None else f" at time index {time_index}"
        super().__init__(f"projected Gauss-Seidel stalled{where}; last sup-change {change:.3e}")


class GridMismatch(RegimeVIError, ValueError):
    pass


class NonMonotoneContact(RegimeVIError):
    def __init__(self, curve: str, time_index: int):
        self.curve = curve
        self.time_index = time_index
        super().__init__(f"contact set for {curve} is not a single interval at time index {time_index}")


class TimeOutOfRange(RegimeVIError, ValueError):
    pass


class PolicyRangeError(RegimeVIError, ValueError):
    pass


class InterpolationOutOfRange(RegimeVIError, ValueError):
    pass


class ConfigError(RegimeVIError, ValueError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"config key {key!r}: {message}")


class FormatError(RegimeVIError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = "" if line is None else f"line {line}: "
        super().__init__(prefix + message)


class ParamMismatch(RegimeVIError, ValueError):
    pass
