"""Exception types raised across the package."""

from __future__ import annotations


class GraphFormatError(ValueError):
    """Malformed edge-list text. ``line`` is 1-based."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ParameterError(ValueError):
    """Chain parameters are invalid for the given graph (e.g. p* >= 1)."""


class RegimeError(ValueError):
    """A check was requested outside the parameter regime it requires."""


class ResourceLimitError(RuntimeError):
    """State space too large for a dense/exact computation."""


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class GenerationError(RuntimeError):
    """A random generator exhausted its retry budget."""


class CouplingTimeout(RuntimeError):
    def __init__(self, message: str, budget: int):
        super().__init__(f"{message} (budget={budget})")
        self.budget = budget
