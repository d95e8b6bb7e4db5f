"""Exception types shared across the package."""

from __future__ import annotations


class DelayCrnError(Exception):
    """Base class for all package-specific errors."""


class NetworkSyntaxError(DelayCrnError):
    """Raised by the network parser; carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class NetworkValidationError(DelayCrnError):
    """A structurally invalid network or kernel (bad rates, kernel mass, ...)."""


class IntegrationError(DelayCrnError):
    """Integration failed: state left the admissible region or blew up."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} (at t = {time:g})")
        self.time = time


class NotWeaklyReversibleError(DelayCrnError):
    """Operation requires a weakly reversible network."""


class NotComplexBalancedError(DelayCrnError):
    """No complex-balanced equilibrium exists for the given rate constants."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class ConvergenceError(DelayCrnError):
    """An iterative solver did not reach its tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual
