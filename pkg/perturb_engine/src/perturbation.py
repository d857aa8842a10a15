#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Perturbation - derivatives, perturbation formulas and Taylor remainders of
t -> f(A + tK)

All multiple operator integrals here are built from divided-difference
kernels f^[n] and evaluated with ``moi_apply``. Finite differences of
t -> f(A + tK) serve as the independent oracle for the derivative formula.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from calculus_errors import DimMismatchError, DivisionDegenerateError
from engine_config import load_engine_config
from funcmodel_engine.src.function_models import FunctionModel, Interval, Polynomial, sup_norm_estimate
from linalg_engine.src.spectral_linalg import (
    ComplexMatrix,
    EigenDecomposition,
    HermitianMatrix,
    SchattenIndex,
    eigh,
    mat_func,
    schatten_norm,
)
from moi_engine.src.moi_contraction import DividedDifferenceKernel, IdentityResidual, MOIRequest, moi_apply

logger = logging.getLogger(__name__)

PERTURB_DEFAULTS = {
    'finite_difference': {
        'step_low_order': 1e-3,
        'step_high_order': 5e-3,
        'richardson': True,
    },
    'p_grid': [1.5, 2.0, 3.0, 4.0],
    'continuity': {
        't_range': [-1.0, 1.0],
        'step': 1e-2,
    },
}

DEGENERATE_FLOOR = 1e-300

# Central stencils: offset (in units of h) -> coefficient; divide by h^k.
STENCILS = {
    1: {-1: -0.5, 1: 0.5},
    2: {-1: 1.0, 0: -2.0, 1: 1.0},
    3: {-2: -0.5, -1: 1.0, 1: -1.0, 2: 0.5},
    4: {-2: 1.0, -1: -4.0, 0: 6.0, 1: -4.0, 2: 1.0},
}


def perturb_config() -> Dict:
    return load_engine_config('perturb_engine', 'perturb', PERTURB_DEFAULTS)


class PerturbationPath:
    """The path t -> A + tK with Hermitian A and K of one dimension, and the function f."""

    def __init__(self, a, k, f: FunctionModel):
        a = a if isinstance(a, HermitianMatrix) else HermitianMatrix(a)
        k = k if isinstance(k, HermitianMatrix) else HermitianMatrix(k)
        if a.dim != k.dim:
            raise DimMismatchError(f"A is {a.dim}x{a.dim} but K is {k.dim}x{k.dim}")
        self.a = a
        self.k = k
        self.f = f
        self._spectra: Dict[float, EigenDecomposition] = {}

    @property
    def dim(self) -> int:
        return self.a.dim

    def at(self, t: float) -> HermitianMatrix:
        return HermitianMatrix(self.a.array + t * self.k.array)

    def spectrum(self, t: float) -> EigenDecomposition:
        """Eigendecomposition of A + tK, cached per t."""
        key = float(t)
        decomposition = self._spectra.get(key)
        if decomposition is None:
            decomposition = eigh(self.at(key))
            self._spectra[key] = decomposition
        return decomposition

    def __repr__(self) -> str:
        return f"PerturbationPath(dim={self.dim}, f={self.f})"


class DerivativeReport:
    """φ^(k)(t) from the integral formula and from finite differences, with Schatten-p relative errors."""

    __slots__ = ('order', 't', 'moi_value', 'fd_value', 'schatten_errors')

    def __init__(self, order: int, t: float, moi_value: ComplexMatrix, fd_value: ComplexMatrix,
                 schatten_errors: Dict[float, float]):
        self.order = order
        self.t = t
        self.moi_value = moi_value
        self.fd_value = fd_value
        self.schatten_errors = schatten_errors

    @property
    def worst_error(self) -> float:
        return max(self.schatten_errors.values()) if self.schatten_errors else 0.0

    def __repr__(self) -> str:
        errors = ', '.join(f"p={p:g}: {e:.2e}" for p, e in self.schatten_errors.items())
        return f"DerivativeReport(k={self.order}, t={self.t:g}, {errors})"


class TaylorRemainder:
    """Both representations of the Taylor remainder R_n and the ratio against the S^p estimate."""

    __slots__ = ('direct', 'moi', 'ratio', 'residual')

    def __init__(self, direct: ComplexMatrix, moi: ComplexMatrix, ratio: Optional[float], residual: IdentityResidual):
        self.direct = direct
        self.moi = moi
        self.ratio = ratio
        self.residual = residual

    def __iter__(self):
        return iter((self.direct, self.moi, self.ratio))


class ContinuityReport:
    """Increments ||φ^(k)(t_{i+1}) - φ^(k)(t_i)||_p over a t grid."""

    __slots__ = ('order', 't_grid', 'increments')

    def __init__(self, order: int, t_grid: np.ndarray, increments: np.ndarray):
        self.order = order
        self.t_grid = t_grid
        self.increments = increments

    @property
    def max_increment(self) -> float:
        return float(np.max(self.increments)) if self.increments.size else 0.0

    @property
    def step(self) -> float:
        return float(self.t_grid[1] - self.t_grid[0]) if self.t_grid.size > 1 else 0.0


def _moi(f: FunctionModel, order: int, spectra: Sequence[EigenDecomposition],
         operands: Sequence[ComplexMatrix]) -> ComplexMatrix:
    return moi_apply(MOIRequest(DividedDifferenceKernel(f, order), spectra, operands))


def _spectral_norm(x: ComplexMatrix) -> float:
    return schatten_norm(x, math.inf)


def phi(path: PerturbationPath, t: float) -> ComplexMatrix:
    """φ(t) = f(A + tK) - f(A)."""
    return mat_func(path.f, path.spectrum(t)) - mat_func(path.f, path.spectrum(0.0))


def derivative_moi(path: PerturbationPath, k: int, t: float) -> ComplexMatrix:
    """
    φ^(k)(t) = k! Γ^{A+tK, ..., A+tK}(f^[k])(K, ..., K).

    Raises:
        OrderExceededError: if k > f.max_order
    """
    if k == 0:
        return phi(path, t)
    spectrum = path.spectrum(t)
    return _moi(path.f, k, [spectrum] * (k + 1), [path.k] * k) * float(math.factorial(k))


def polynomial_path_derivative(f: Polynomial, a: ComplexMatrix, k_dir: ComplexMatrix, k: int, t: float) -> ComplexMatrix:
    """
    Exact k-th derivative of t -> f(A + tK) for a polynomial f, by the
    recurrence (M P)^(k) = M P^(k) + k K P^(k-1) on powers of M = A + tK.
    """
    m = a.array + t * k_dir.array
    dim = m.shape[0]
    # derivatives[j] holds d^j/dt^j of the current power M^power
    derivatives = [np.eye(dim, dtype=np.complex128)] + [np.zeros((dim, dim), dtype=np.complex128)] * k
    result = np.zeros((dim, dim), dtype=np.complex128)
    coefficients = f.coefficients[::-1]
    for power, c in enumerate(coefficients):
        if power > 0:
            derivatives = [m @ derivatives[j] + (j * (k_dir.array @ derivatives[j - 1]) if j > 0 else 0.0)
                           for j in range(k + 1)]
        result = result + c * derivatives[k]
    return ComplexMatrix(result)


def default_fd_step(path: PerturbationPath, k: int) -> float:
    """
    Step in t for the k-th difference: h = 1e-3 (k <= 2) or 5e-3 (k >= 3) in the
    spectral scale, h_t = h (||A||_2 + ||K||_2) / ||K||_2, or h when K = 0.
    """
    config = perturb_config()['finite_difference']
    h = float(config['step_low_order'] if k <= 2 else config['step_high_order'])
    k_norm = _spectral_norm(path.k)
    if k_norm == 0.0:
        return h
    return h * (_spectral_norm(path.a) + k_norm) / k_norm


def derivative_fd(path: PerturbationPath, k: int, t: float, h: Optional[float] = None) -> ComplexMatrix:
    """
    k-th central difference of t -> f(A + tK) (k <= 4) with one Richardson step
    (4 D(h/2) - D(h)) / 3.

    Args:
        path: Perturbation path
        k: Derivative order, 0 returns φ(t)
        t: Point of differentiation
        h: Step in t (defaults to ``default_fd_step``)
    """
    if k == 0:
        return phi(path, t)
    if k not in STENCILS:
        raise ValueError(f"Finite differences are available for orders 1..4, got {k}")
    if h is None:
        h = default_fd_step(path, k)
    if not h > 0.0:
        raise ValueError(f"Finite-difference step must be positive, got {h}")

    values: Dict[float, np.ndarray] = {}

    def f_at(s: float) -> np.ndarray:
        if s not in values:
            values[s] = mat_func(path.f, eigh(path.at(s))).array
        return values[s]

    def central(step: float) -> np.ndarray:
        total = sum(c * f_at(t + offset * step) for offset, c in STENCILS[k].items())
        return total / step ** k

    coarse = central(h)
    if not perturb_config()['finite_difference']['richardson']:
        return ComplexMatrix(coarse)
    fine = central(0.5 * h)
    logger.debug(f"FD order {k} at t={t:g}: h={h:.3e}, Richardson correction {np.linalg.norm(fine - coarse):.3e}")
    return ComplexMatrix((4.0 * fine - coarse) / 3.0)


def derivative_report(path: PerturbationPath, k: int, t: float, p_values: Sequence[float],
                      h: Optional[float] = None) -> DerivativeReport:
    moi_value = derivative_moi(path, k, t)
    fd_value = derivative_fd(path, k, t, h)
    errors = {float(p): IdentityResidual(moi_value, fd_value, p).relative for p in p_values}
    return DerivativeReport(k, t, moi_value, fd_value, errors)


def spectral_hull(path: PerturbationPath) -> Interval:
    """[min λ - ||K||_2, max λ + ||K||_2] over the spectra of A and A + K."""
    eigenvalues = np.concatenate([path.spectrum(0.0).eigenvalues, path.spectrum(1.0).eigenvalues])
    return Interval.hull(eigenvalues, pad=_spectral_norm(path.k))


def _replace_slot(spectra: List, slot: int, *inserted) -> List:
    return spectra[:slot - 1] + list(inserted) + spectra[slot - 1:]


def perturbation_formula_residual(a_list: Sequence, a, b, f: FunctionModel, n: int, slot: int,
                                  k_list: Sequence, p=2.0) -> IdentityResidual:
    """
    [Γ^{.., B, ..}(f^[n-1]) - Γ^{.., A, ..}(f^[n-1])](K_1..K_{n-1}) against
    Γ^{.., B, A, ..}(f^[n])(K_1..K_{j-1}, B - A, K_j..K_{n-1}), where B (resp. A)
    sits in position j among A_1..A_{n-1}.

    Args:
        a_list: A_1, ..., A_{n-1}
        a, b: The two Hermitian matrices being compared
        f: Function model with max_order >= n
        n: Order of the right-hand side, n >= 1
        slot: j with 1 <= j <= n
        k_list: K_1, ..., K_{n-1}
        p: Schatten exponent of the residual
    """
    if n < 1 or not 1 <= slot <= n:
        raise ValueError(f"Need n >= 1 and 1 <= j <= n, got n={n}, j={slot}")
    if len(a_list) != n - 1 or len(k_list) != n - 1:
        raise DimMismatchError(f"Order {n} needs {n - 1} matrices A_i and {n - 1} operands K_i")
    a = a if isinstance(a, HermitianMatrix) else HermitianMatrix(a)
    b = b if isinstance(b, HermitianMatrix) else HermitianMatrix(b)
    others = [eigh(x) for x in a_list]
    spectrum_a, spectrum_b = eigh(a), eigh(b)
    operands = [ComplexMatrix.coerce(x) for x in k_list]

    lhs = (_moi(f, n - 1, _replace_slot(others, slot, spectrum_b), operands)
           - _moi(f, n - 1, _replace_slot(others, slot, spectrum_a), operands))
    rhs_operands = operands[:slot - 1] + [b - a] + operands[slot - 1:]
    rhs = _moi(f, n, _replace_slot(others, slot, spectrum_b, spectrum_a), rhs_operands)
    return IdentityResidual(lhs, rhs, p)


def first_order_difference_residual(a, k, f: FunctionModel, p=2.0) -> IdentityResidual:
    """f(A + K) - f(A) against Γ^{A+K, A}(f^[1])(K)."""
    a = a if isinstance(a, HermitianMatrix) else HermitianMatrix(a)
    k = k if isinstance(k, HermitianMatrix) else HermitianMatrix(k)
    return perturbation_formula_residual([], a, a + k, f, 1, 1, [], p)


def commutator_perturbation_residual(a_list: Sequence, a, b, f: FunctionModel, n: int, slot: int,
                                     k_list: Sequence, x, p=2.0) -> IdentityResidual:
    """
    Γ^{.., B, A, ..}(f^[n])(K_1..K_{j-1}, BX - XA, K_j..K_{n-1}) against
    Γ^{.., B, ..}(f^[n-1])(.., X K_j, ..) - Γ^{.., A, ..}(f^[n-1])(.., K_{j-1} X, ..).

    For j = n the first term is Γ^{.., B}(f^[n-1])(K_1..K_{n-1}) X, for j = 1
    the second is X Γ^{A, ..}(f^[n-1])(K_1..K_{n-1}). X = I gives the
    perturbation formula.
    """
    if n < 1 or not 1 <= slot <= n:
        raise ValueError(f"Need n >= 1 and 1 <= j <= n, got n={n}, j={slot}")
    if len(a_list) != n - 1 or len(k_list) != n - 1:
        raise DimMismatchError(f"Order {n} needs {n - 1} matrices A_i and {n - 1} operands K_i")
    a = a if isinstance(a, HermitianMatrix) else HermitianMatrix(a)
    b = b if isinstance(b, HermitianMatrix) else HermitianMatrix(b)
    x = ComplexMatrix.coerce(x)
    others = [eigh(m) for m in a_list]
    spectrum_a, spectrum_b = eigh(a), eigh(b)
    operands = [ComplexMatrix.coerce(m) for m in k_list]

    lhs_operands = operands[:slot - 1] + [b @ x - x @ a] + operands[slot - 1:]
    lhs = _moi(f, n, _replace_slot(others, slot, spectrum_b, spectrum_a), lhs_operands)

    spectra_b = _replace_slot(others, slot, spectrum_b)
    if slot == n:
        first = _moi(f, n - 1, spectra_b, operands) @ x
    else:
        shifted = list(operands)
        shifted[slot - 1] = x @ shifted[slot - 1]
        first = _moi(f, n - 1, spectra_b, shifted)

    spectra_a = _replace_slot(others, slot, spectrum_a)
    if slot == 1:
        second = x @ _moi(f, n - 1, spectra_a, operands)
    else:
        shifted = list(operands)
        shifted[slot - 2] = shifted[slot - 2] @ x
        second = _moi(f, n - 1, spectra_a, shifted)
    return IdentityResidual(lhs, first - second, p)


def telescoping_residual(path: PerturbationPath, n: int, slot: int, x_list: Sequence, t: float,
                         p=2.0) -> IdentityResidual:
    """
    ψ(t) - ψ(0) against t sum_{k=1}^{j} Γ^{(A+tK)^{j-k+1}, A^{n-j+k}}(f^[n])(X_1..X_{j-k}, K, X_{j-k+1}..X_{n-1}),
    with ψ(t) = Γ^{(A+tK)^j, A^{n-j}}(f^[n-1])(X_1..X_{n-1}).
    """
    if n < 1 or not 1 <= slot <= n:
        raise ValueError(f"Need n >= 1 and 1 <= j <= n, got n={n}, j={slot}")
    if len(x_list) != n - 1:
        raise DimMismatchError(f"Order {n} needs {n - 1} operands, got {len(x_list)}")
    operands = [ComplexMatrix.coerce(x) for x in x_list]
    moved, base = path.spectrum(t), path.spectrum(0.0)

    lhs = (_moi(path.f, n - 1, [moved] * slot + [base] * (n - slot), operands)
           - _moi(path.f, n - 1, [base] * n, operands))
    rhs = ComplexMatrix.zeros(path.dim)
    for k in range(1, slot + 1):
        spectra = [moved] * (slot - k + 1) + [base] * (n - slot + k)
        inserted = operands[:slot - k] + [path.k] + operands[slot - k:]
        rhs = rhs + _moi(path.f, n, spectra, inserted)
    return IdentityResidual(lhs, rhs * t, p)


def moi_path_derivative_residual(path: PerturbationPath, n: int, p=2.0,
                                 h: Optional[float] = None) -> IdentityResidual:
    """
    Finite-difference derivative at 0 of ψ(t) = Γ^{(A+tK)^n}(f^[n-1])(K, ..., K)
    against n Γ^{A^{n+1}}(f^[n])(K, ..., K). Compare with ``IdentityResidual.relative``.
    """
    if n < 1:
        raise ValueError(f"Need n >= 1, got {n}")
    if h is None:
        h = default_fd_step(path, 1)
    operands = [path.k] * (n - 1)

    def psi(s: float) -> np.ndarray:
        return _moi(path.f, n - 1, [eigh(path.at(s))] * n, operands).array

    def central(step: float) -> np.ndarray:
        return (psi(step) - psi(-step)) / (2.0 * step)

    fd = ComplexMatrix((4.0 * central(0.5 * h) - central(h)) / 3.0)
    exact = _moi(path.f, n, [path.spectrum(0.0)] * (n + 1), [path.k] * n) * float(n)
    return IdentityResidual(fd, exact, p)


def _ratio(numerator: float, denominator: float, what: str) -> float:
    if not denominator > DEGENERATE_FLOOR:
        raise DivisionDegenerateError(f"{what}: denominator {denominator:.3e} is numerically zero")
    ratio = numerator / denominator
    if not math.isfinite(ratio):
        raise DivisionDegenerateError(f"{what}: ratio {numerator:.3e}/{denominator:.3e} is not finite")
    return ratio


def taylor_remainder(path: PerturbationPath, n: int, p=2.0) -> TaylorRemainder:
    """
    R_n = f(A + K) - f(A) - sum_{k=1}^{n-1} φ^(k)(0)/k! computed directly and as
    Γ^{A+K, A, ..., A}(f^[n])(K, ..., K), plus the ratio
    ||R_n||_p / (sup|f^(n)| ||K||_{np}^n) over the spectral hull.

    The ratio is None when its denominator vanishes (f^(n) = 0 on the hull or K = 0).
    """
    if n < 1:
        raise ValueError(f"Taylor remainder order must be >= 1, got {n}")
    index = SchattenIndex(p)
    direct = phi(path, 1.0)
    for k in range(1, n):
        direct = direct - derivative_moi(path, k, 0.0) * (1.0 / math.factorial(k))
    moi = _moi(path.f, n, [path.spectrum(1.0)] + [path.spectrum(0.0)] * n, [path.k] * n)
    residual = IdentityResidual(direct, moi, index)

    try:
        denominator = (sup_norm_estimate(path.f, n, spectral_hull(path))
                       * schatten_norm(path.k, index.scaled(n)) ** n)
        ratio = _ratio(residual.lhs_norm, denominator, f"Taylor remainder ratio (n={n}, p={index.p:g})")
    except DivisionDegenerateError as e:
        logger.warning(f"{e}; ratio not reported")
        ratio = None
    return TaylorRemainder(direct, moi, ratio, residual)


def boundedness_ratio(f: FunctionModel, n: int, spectra: Sequence[EigenDecomposition],
                      operands: Sequence, p=2.0) -> float:
    """
    ||Γ(f^[n])(X_1..X_n)||_p / (sup|f^(n)| prod ||X_i||_{np}), sup over the hull of all spectra.

    Raises:
        DivisionDegenerateError: when the denominator underflows
    """
    index = SchattenIndex(p)
    operands = [ComplexMatrix.coerce(x) for x in operands]
    value = _moi(f, n, spectra, operands)
    hull = Interval.hull(np.concatenate([s.eigenvalues for s in spectra]))
    denominator = sup_norm_estimate(f, n, hull)
    for x in operands:
        denominator *= schatten_norm(x, index.scaled(n))
    ratio = _ratio(schatten_norm(value, index), denominator, f"Boundedness ratio (n={n}, p={index.p:g})")
    logger.debug(f"Boundedness ratio n={n} p={index.p:g}: {ratio:.6g}")
    return ratio


def _increments(values: Sequence[ComplexMatrix], index: SchattenIndex) -> np.ndarray:
    return np.array([schatten_norm(b - a, index) for a, b in zip(values[:-1], values[1:])])


def continuity_sweep(path: PerturbationPath, k: int, t_grid: Sequence[float], p=2.0) -> ContinuityReport:
    """Increments of φ^(k) between consecutive grid points, in Schatten p-norm."""
    grid = np.asarray(t_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("A continuity sweep needs at least two grid points")
    values = [derivative_moi(path, k, float(t)) for t in grid]
    report = ContinuityReport(k, grid, _increments(values, SchattenIndex(p)))
    logger.debug(f"Continuity sweep k={k}, step {report.step:.3e}: max increment {report.max_increment:.3e}")
    return report


def uniform_grid(t_range: Sequence[float], step: float) -> np.ndarray:
    lo, hi = float(t_range[0]), float(t_range[1])
    if not hi > lo or not step > 0.0:
        raise ValueError(f"Invalid grid [{lo}, {hi}] with step {step}")
    return np.linspace(lo, hi, int(round((hi - lo) / step)) + 1)


def continuity_halving_ratio(path: PerturbationPath, k: int, t_range: Sequence[float], step: float,
                             p=2.0) -> Tuple[float, float, float]:
    """
    Max increment at ``step`` and at ``step / 2`` on ``t_range``; returns
    (coarse max, fine max, fine / coarse) with ratio 0 when both vanish.

    The coarse grid is every other point of the fine one, so φ^(k) is
    evaluated once per fine grid point.
    """
    coarse_grid = uniform_grid(t_range, step)
    fine_grid = np.linspace(coarse_grid[0], coarse_grid[-1], 2 * coarse_grid.size - 1)
    index = SchattenIndex(p)
    values = [derivative_moi(path, k, float(t)) for t in fine_grid]
    fine = float(np.max(_increments(values, index)))
    coarse = float(np.max(_increments(values[::2], index)))
    logger.debug(f"Continuity halving k={k}: coarse {coarse:.3e}, fine {fine:.3e} over {fine_grid.size} points")
    ratio = fine / coarse if coarse > 0.0 else 0.0
    return coarse, fine, ratio
