#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Function Models - scalar functions with exact derivatives

Every model evaluates f and its derivatives f', ..., f^(max_order)
analytically and elementwise on numpy arrays. These are the functions fed
into divided differences, multiple operator integrals and the perturbation
formulas.
"""

import logging
import math
from typing import Callable, List, Literal, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from calculus_errors import EvalError, OrderExceededError

logger = logging.getLogger(__name__)

DEFAULT_MAX_ORDER = 12
SUP_GRID_POINTS = 4096
SUP_INFLATION = 1.01

ArrayLike = Union[float, complex, np.ndarray, Sequence[float]]


class Interval:
    """Closed real interval [lo, hi] with finite endpoints."""

    __slots__ = ('lo', 'hi')

    def __init__(self, lo: float, hi: float):
        lo, hi = float(lo), float(hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"Interval endpoints must be finite, got [{lo}, {hi}]")
        if lo > hi:
            raise ValueError(f"Interval requires lo <= hi, got [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @classmethod
    def hull(cls, values: ArrayLike, pad: float = 0.0) -> 'Interval':
        """Smallest interval containing ``values``, widened by ``pad`` on both sides."""
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        return cls(float(values.min()) - pad, float(values.max()) + pad)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __repr__(self) -> str:
        return f"Interval({self.lo:.6g}, {self.hi:.6g})"


class FunctionModel:
    """
    Base class for scalar functions with exact derivatives up to ``max_order``.

    Subclasses implement ``_derivative(order, x)`` on float64 arrays.
    """

    kind = 'abstract'

    def __init__(self, max_order: int = DEFAULT_MAX_ORDER):
        if max_order < 0:
            raise ValueError(f"max_order must be non-negative, got {max_order}")
        self.max_order = int(max_order)

    def _derivative(self, order: int, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def eval_deriv(self, order: int, x: ArrayLike):
        """
        Evaluate f^(order) elementwise.

        Args:
            order: Derivative order, 0 returns f itself
            x: Scalar or array of real points

        Returns:
            A scalar for scalar input, otherwise an array of the same shape

        Raises:
            OrderExceededError: if order > max_order
            EvalError: if the value is not finite
        """
        if order < 0:
            raise ValueError(f"Derivative order must be non-negative, got {order}")
        if order > self.max_order:
            raise OrderExceededError(order, self.max_order, str(self))
        points = np.asarray(x, dtype=np.float64)
        values = self._derivative(order, points)
        if not np.all(np.isfinite(values)):
            raise EvalError(f"{self} has no finite derivative of order {order} at {x}")
        if values.ndim == 0:
            return values.item()
        return values

    @property
    def is_real(self) -> bool:
        return True

    def __str__(self) -> str:
        return self.kind


class Polynomial(FunctionModel):
    """Polynomial with coefficients listed from the highest degree down (numpy convention)."""

    kind = 'poly'

    def __init__(self, coefficients: Sequence[float], max_order: int = DEFAULT_MAX_ORDER):
        super().__init__(max_order)
        coefficients = np.trim_zeros(np.asarray(coefficients, dtype=np.float64), 'f')
        if coefficients.size == 0:
            coefficients = np.zeros(1)
        if not np.all(np.isfinite(coefficients)):
            raise ValueError("Polynomial coefficients must be finite")
        self.coefficients = coefficients

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    def _derivative(self, order, x):
        if order > self.degree:
            return np.zeros_like(x)
        return np.polyval(np.polyder(self.coefficients, order), x)

    def __str__(self):
        return f"poly({','.join(f'{c:g}' for c in self.coefficients)})"


class Exp(FunctionModel):
    """x -> exp(scale * x)"""

    kind = 'exp'

    def __init__(self, scale: float = 1.0, max_order: int = DEFAULT_MAX_ORDER):
        super().__init__(max_order)
        if not math.isfinite(scale):
            raise ValueError(f"Exp scale must be finite, got {scale}")
        self.scale = float(scale)

    def _derivative(self, order, x):
        return self.scale ** order * np.exp(self.scale * x)

    def __str__(self):
        return f"exp({self.scale:g})"


class Sin(FunctionModel):
    """x -> sin(frequency * x)"""

    kind = 'sin'

    def __init__(self, frequency: float = 1.0, max_order: int = DEFAULT_MAX_ORDER):
        super().__init__(max_order)
        if not math.isfinite(frequency):
            raise ValueError(f"Sin frequency must be finite, got {frequency}")
        self.frequency = float(frequency)

    def _derivative(self, order, x):
        wx = self.frequency * x
        cycle = (np.sin(wx), np.cos(wx), -np.sin(wx), -np.cos(wx))
        return self.frequency ** order * cycle[order % 4]

    def __str__(self):
        return f"sin({self.frequency:g})"


class Cos(FunctionModel):
    """x -> cos(frequency * x)"""

    kind = 'cos'

    def __init__(self, frequency: float = 1.0, max_order: int = DEFAULT_MAX_ORDER):
        super().__init__(max_order)
        if not math.isfinite(frequency):
            raise ValueError(f"Cos frequency must be finite, got {frequency}")
        self.frequency = float(frequency)

    def _derivative(self, order, x):
        wx = self.frequency * x
        cycle = (np.cos(wx), -np.sin(wx), -np.cos(wx), np.sin(wx))
        return self.frequency ** order * cycle[order % 4]

    def __str__(self):
        return f"cos({self.frequency:g})"


class InvQuad(FunctionModel):
    """
    x -> 1/(1 + x^2).

    Uses 1/(1 + x^2) = Im(1/(x - i)), so f^(k)(x) = (-1)^k k! Im((x - i)^-(k+1)).
    """

    kind = 'invquad'

    def _derivative(self, order, x):
        w = 1.0 / (x - 1j)
        power = w
        for _ in range(order):
            power = power * w
        return (-1.0) ** order * math.factorial(order) * power.imag

    def __str__(self):
        return 'invquad'


class SqrtEps(FunctionModel):
    """
    x -> sqrt(x^2 + eps), eps > 0.

    Derivatives follow from (x^2 + eps) g' = x g, differentiated k times:
    (x^2 + eps) g^(k+1) = (1 - 2k) x g^(k) + k (2 - k) g^(k-1).
    """

    kind = 'sqrteps'

    def __init__(self, eps: float = 1.0, max_order: int = DEFAULT_MAX_ORDER):
        super().__init__(max_order)
        if not (math.isfinite(eps) and eps > 0.0):
            raise ValueError(f"SqrtEps requires eps > 0, got {eps}")
        self.eps = float(eps)

    def _derivative(self, order, x):
        u = x * x + self.eps
        previous = np.sqrt(u)
        if order == 0:
            return previous
        current = x / previous
        for k in range(1, order):
            previous, current = current, ((1 - 2 * k) * x * current + k * (2 - k) * previous) / u
        return current

    def __str__(self):
        return f"sqrteps({self.eps:g})"


class Custom(FunctionModel):
    """
    User-supplied model: ``derivatives[i]`` evaluates f^(i) elementwise on
    numpy arrays; ``max_order`` is ``len(derivatives) - 1``.
    """

    kind = 'custom'

    def __init__(self, derivatives: Sequence[Callable[[np.ndarray], np.ndarray]], name: str = 'custom',
                 is_real: bool = True):
        if not derivatives:
            raise ValueError("Custom model needs at least the order-0 evaluator")
        super().__init__(len(derivatives) - 1)
        self._derivatives = list(derivatives)
        self._name = name
        self._is_real = is_real

    @property
    def is_real(self) -> bool:
        return self._is_real

    def _derivative(self, order, x):
        values = np.asarray(self._derivatives[order](x))
        return np.broadcast_to(values, np.shape(x)) if values.ndim == 0 else values

    def __str__(self):
        return self._name


def eval_deriv(f: FunctionModel, order: int, x: ArrayLike):
    """Exact f^(order)(x); see ``FunctionModel.eval_deriv``."""
    return f.eval_deriv(order, x)


def sup_norm_estimate(f: FunctionModel, order: int, interval: Interval) -> float:
    """
    Estimate sup |f^(order)| on ``interval``.

    The maximum over a uniform grid of 4096 points, inflated by 1%. This is
    an estimate for reporting ratios, not a certified bound.

    Raises:
        OrderExceededError: if order > f.max_order
    """
    grid = np.linspace(interval.lo, interval.hi, SUP_GRID_POINTS)
    values = np.abs(np.asarray(f.eval_deriv(order, grid)))
    estimate = SUP_INFLATION * float(values.max())
    logger.debug(f"sup |{f}^({order})| on {interval} ~ {estimate:.6g}")
    return estimate


def product_model(f: FunctionModel, g: FunctionModel) -> Custom:
    """
    The product x -> g(x) f(x) as a Custom model, with derivatives from the
    Leibniz rule (gf)^(k) = sum_i C(k, i) g^(i) f^(k-i).
    """
    order = min(f.max_order, g.max_order)

    def leibniz(k: int) -> Callable[[np.ndarray], np.ndarray]:
        def derivative(x):
            return sum(math.comb(k, i) * np.asarray(g.eval_deriv(i, x)) * np.asarray(f.eval_deriv(k - i, x))
                       for i in range(k + 1))
        return derivative

    return Custom([leibniz(k) for k in range(order + 1)], name=f"({g})*({f})",
                  is_real=f.is_real and g.is_real)


class FunctionSpec(BaseModel):
    """CLI/JSON description of a built-in model: ``{"kind": ..., "params": [...]}``."""

    kind: Literal['exp', 'sin', 'cos', 'poly', 'invquad', 'sqrteps']
    params: List[float] = Field(default_factory=list)

    @field_validator('params')
    @classmethod
    def _finite_params(cls, params: List[float]) -> List[float]:
        if not all(math.isfinite(p) for p in params):
            raise ValueError('function parameters must be finite')
        return params

    @model_validator(mode='after')
    def _check_arity(self) -> 'FunctionSpec':
        if self.kind == 'poly' and not self.params:
            raise ValueError('poly needs at least one coefficient')
        if self.kind == 'invquad' and self.params:
            raise ValueError('invquad takes no parameters')
        if self.kind in ('exp', 'sin', 'cos', 'sqrteps') and len(self.params) > 1:
            raise ValueError(f"{self.kind} takes at most one parameter")
        if self.kind == 'sqrteps' and self.params and self.params[0] <= 0.0:
            raise ValueError('sqrteps requires eps > 0')
        return self

    def build(self) -> FunctionModel:
        """Instantiate the described model."""
        first = self.params[0] if self.params else 1.0
        if self.kind == 'poly':
            return Polynomial(self.params)
        if self.kind == 'exp':
            return Exp(first)
        if self.kind == 'sin':
            return Sin(first)
        if self.kind == 'cos':
            return Cos(first)
        if self.kind == 'sqrteps':
            return SqrtEps(first)
        return InvQuad()

    def label(self) -> str:
        return f"{self.kind}:{','.join(f'{p:g}' for p in self.params)}" if self.params else self.kind


def parse_function_spec(text: str) -> FunctionSpec:
    """
    Parse the compact flag form ``kind:p1,p2,...`` (e.g. ``poly:1,0,0`` for x^2).

    Raises:
        ValueError: on an unknown kind or unparsable parameters
    """
    kind, _, raw = text.strip().partition(':')
    params = [float(token) for token in raw.split(',') if token.strip()] if raw else []
    return FunctionSpec(kind=kind.strip().lower(), params=params)
