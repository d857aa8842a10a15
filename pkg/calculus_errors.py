#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Calculus Errors

Exception hierarchy shared by every engine. Library code raises these;
only the command-line boundary turns them into exit codes.
"""

from numpy.linalg import LinAlgError


class CalculusError(Exception):
    """Base class for all errors raised by the engines."""


class NonConvergenceError(CalculusError, LinAlgError):
    """The Jacobi eigensolver exceeded its sweep cap."""

    def __init__(self, sweeps: int, off_norm: float, target: float):
        self.sweeps = sweeps
        self.off_norm = off_norm
        self.target = target
        super().__init__(
            f"Jacobi iteration did not converge after {sweeps} sweeps "
            f"(off-diagonal norm {off_norm:.3e} > target {target:.3e})"
        )


class EvalError(CalculusError, ValueError):
    """A function model could not be evaluated at a requested point."""


class OrderExceededError(CalculusError, ValueError):
    """A derivative beyond the declared max_order of a model was requested."""

    def __init__(self, requested: int, max_order: int, model: str = "function model"):
        self.requested = requested
        self.max_order = max_order
        super().__init__(
            f"{model} provides exact derivatives up to order {max_order}, "
            f"but order {requested} was requested"
        )


class InvalidPError(CalculusError, ValueError):
    """Schatten exponent below 1."""


class UnsupportedOrderError(CalculusError, ValueError):
    """The simplex quadrature oracle only handles orders up to 3."""


class DimMismatchError(CalculusError, ValueError):
    """Matrix dimensions, spectra and kernel shapes do not agree."""


class NotCommutingError(CalculusError, ValueError):
    """An operand that is required to commute with A does not."""


class DivisionDegenerateError(CalculusError, ArithmeticError):
    """A ratio denominator underflowed (operand or derivative numerically zero)."""


class ConfigError(CalculusError, ValueError):
    """Invalid experiment configuration; carries the offending field name."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
