#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
MOI Identities - the algebra of multiple operator integrals as executable checks

Each check evaluates both sides of an identity through ``moi_apply`` and
returns an ``IdentityResidual``. The composition, splitting and insertion
checks accept any contraction with the signature of ``moi_apply`` (for
example ``moi_apply_bruteforce`` at small dimension). Slots are 1-based,
matching the way the identities are usually written (A_1, ..., A_n and K_1, ..., K_{n-1}).
"""

import logging
import math
from typing import Callable, Optional, Sequence

import numpy as np

from calculus_errors import DimMismatchError, NotCommutingError
from funcmodel_engine.src.function_models import FunctionModel
from linalg_engine.src.spectral_linalg import ComplexMatrix, EigenDecomposition, HermitianMatrix, eigh
from moi_engine.src.moi_contraction import (
    DividedDifferenceKernel,
    GridKernel,
    IdentityResidual,
    MOIKernel,
    MOIRequest,
    materialize_kernel,
    moi_apply,
)

logger = logging.getLogger(__name__)

COMMUTATOR_RTOL = 1e-10


def _apply(kernel: MOIKernel, spectra, operands, apply: Callable = moi_apply) -> ComplexMatrix:
    return apply(MOIRequest(kernel, spectra, operands))


def _chain(matrices: Sequence[ComplexMatrix], dim: int) -> ComplexMatrix:
    product = ComplexMatrix.identity(dim)
    for matrix in matrices:
        product = product @ matrix
    return product


def moi_commuting_check(f: FunctionModel, n: int, a: HermitianMatrix, zs: Sequence[ComplexMatrix],
                        p=None) -> IdentityResidual:
    """
    Γ^{A,...,A}(f^[n])(Z_1, ..., Z_n) against f^(n)(A) Z_1 ... Z_n / n! for Z_i commuting with A.

    Raises:
        NotCommutingError: if some ||[A, Z_i]||_F exceeds 1e-10 (1 + ||A||_F ||Z_i||_F)
    """
    a = HermitianMatrix(a) if not isinstance(a, HermitianMatrix) else a
    zs = [ComplexMatrix.coerce(z) for z in zs]
    if len(zs) != n:
        raise DimMismatchError(f"Order {n} needs {n} operands, got {len(zs)}")
    for i, z in enumerate(zs, start=1):
        defect = a.commutator(z).frobenius_norm()
        bound = COMMUTATOR_RTOL * (1.0 + a.frobenius_norm() * z.frobenius_norm())
        if defect > bound:
            raise NotCommutingError(f"Operand Z_{i} does not commute with A: ||[A, Z]||_F = {defect:.3e} > {bound:.3e}")

    decomposition = eigh(a)
    lhs = _apply(DividedDifferenceKernel(f, n), [decomposition] * (n + 1), zs)
    derivative = decomposition.spectral_apply(np.asarray(f.eval_deriv(n, decomposition.eigenvalues)))
    rhs = (derivative @ _chain(zs, a.dim)) * (1.0 / math.factorial(n))
    return IdentityResidual(lhs, rhs, p)


def lift_pair_kernel(values: np.ndarray, pair: np.ndarray, slot: int) -> np.ndarray:
    """
    φ1(x_1..x_n) φ2(x_j, x_{j+1}): multiply ``pair`` (axes j, j+1) into ``values``.
    """
    n = values.ndim
    indices = list(range(n))
    return np.einsum(values, indices, pair, [slot - 1, slot], indices)


def moi_compose_check(phi1: MOIKernel, phi2: MOIKernel, slot: int,
                      spectra: Sequence[EigenDecomposition], operands: Sequence[ComplexMatrix],
                      p=None, apply: Callable = moi_apply) -> IdentityResidual:
    """
    Γ^{A_1..A_n}(φ1 φ̃2)(K_1, ..., K_{n-1}) against
    Γ^{A_1..A_n}(φ1)(K_1, ..., Γ^{A_j, A_{j+1}}(φ2)(K_j), ..., K_{n-1}),
    where φ̃2(x_1..x_n) = φ2(x_j, x_{j+1}).

    Args:
        phi1: Kernel of order n-1 over the n spectra
        phi2: Kernel of order 1
        slot: j with 1 <= j <= n-1
    """
    n = len(spectra)
    if phi2.order != 1:
        raise DimMismatchError(f"The inner kernel must have order 1, got {phi2.order}")
    if phi1.order != n - 1 or len(operands) != n - 1:
        raise DimMismatchError(f"Outer kernel order {phi1.order} does not fit {n} spectra and {len(operands)} operands")
    if not 1 <= slot <= n - 1:
        raise ValueError(f"Slot must lie in [1, {n - 1}], got {slot}")

    pair_spectra = [spectra[slot - 1], spectra[slot]]
    lifted = lift_pair_kernel(materialize_kernel(phi1, spectra), materialize_kernel(phi2, pair_spectra), slot)
    lhs = _apply(GridKernel(lifted), spectra, operands, apply)

    inner = _apply(phi2, pair_spectra, [operands[slot - 1]], apply)
    replaced = list(operands)
    replaced[slot - 1] = inner
    rhs = _apply(phi1, spectra, replaced, apply)
    return IdentityResidual(lhs, rhs, p)


def moi_split_check(phi1: MOIKernel, phi2: MOIKernel, slot: int,
                    spectra: Sequence[EigenDecomposition], operands: Sequence[ComplexMatrix],
                    p=None, apply: Callable = moi_apply) -> IdentityResidual:
    """
    Γ^{A_1..A_n}(φ)(K_1..K_{n-1}) = Γ^{A_1..A_j}(φ1)(K_1..K_{j-1}) · Γ^{A_j..A_n}(φ2)(K_j..K_{n-1})
    for φ(x_1..x_n) = φ1(x_1..x_j) φ2(x_j..x_n) and 2 <= j <= n-1.
    """
    n = len(spectra)
    if not 2 <= slot <= n - 1:
        raise ValueError(f"Slot must lie in [2, {n - 1}], got {slot}")
    if phi1.order != slot - 1 or phi2.order != n - slot or len(operands) != n - 1:
        raise DimMismatchError(
            f"Kernels of orders {phi1.order}, {phi2.order} do not split {n} spectra at slot {slot}"
        )
    left_spectra = spectra[:slot]
    right_spectra = spectra[slot - 1:]
    product = np.einsum(materialize_kernel(phi1, left_spectra), list(range(slot)),
                        materialize_kernel(phi2, right_spectra), list(range(slot - 1, n)),
                        list(range(n)))
    lhs = _apply(GridKernel(product), spectra, operands, apply)
    rhs = (_apply(phi1, left_spectra, operands[:slot - 1], apply)
           @ _apply(phi2, right_spectra, operands[slot - 1:], apply))
    return IdentityResidual(lhs, rhs, p)


def moi_insert_check(phi: MOIKernel, slot: int, spectra: Sequence[EigenDecomposition],
                     operands: Sequence[ComplexMatrix], p=None, apply: Callable = moi_apply) -> IdentityResidual:
    """
    For φ̃(x_1..x_n) = φ(x_1..x_{j-1}, x_{j+1}..x_n), i.e. φ not depending on slot j:

    - 2 <= j <= n-1: Γ(φ̃)(K_1..K_{n-1}) = Γ(φ)(.., K_{j-1} K_j, ..)
    - j = 1: Γ(φ̃)(K_1..K_{n-1}) = K_1 Γ(φ)(K_2..K_{n-1})
    - j = n: Γ(φ̃)(K_1..K_{n-1}) = Γ(φ)(K_1..K_{n-2}) K_{n-1}

    Args:
        phi: Kernel of order n-2 over the spectra without A_j
        spectra: All n spectra A_1..A_n
        operands: K_1..K_{n-1}
    """
    n = len(spectra)
    if n < 2 or not 1 <= slot <= n:
        raise ValueError(f"Slot must lie in [1, {n}] with at least two spectra, got {slot} of {n}")
    if phi.order != n - 2 or len(operands) != n - 1:
        raise DimMismatchError(f"Kernel order {phi.order} does not fit {n} spectra with slot {slot} removed")

    reduced_spectra = list(spectra[:slot - 1]) + list(spectra[slot:])
    values = np.expand_dims(materialize_kernel(phi, reduced_spectra), slot - 1)
    shape = tuple(s.dim for s in spectra)
    lifted = np.broadcast_to(values, shape).copy()
    lhs = _apply(GridKernel(lifted), spectra, operands, apply)

    if slot == 1:
        rhs = operands[0] @ _apply(phi, reduced_spectra, operands[1:], apply)
    elif slot == n:
        rhs = _apply(phi, reduced_spectra, operands[:-1], apply) @ operands[-1]
    else:
        merged = list(operands[:slot - 2]) + [operands[slot - 2] @ operands[slot - 1]] + list(operands[slot:])
        rhs = _apply(phi, reduced_spectra, merged, apply)
    return IdentityResidual(lhs, rhs, p)


def moi_adjoint_check(kernel: MOIKernel, spectra: Sequence[EigenDecomposition],
                      operands: Sequence[ComplexMatrix], p=None) -> IdentityResidual:
    """
    Γ^{A_1..A_{n+1}}(φ)(X_1..X_n)* against Γ^{A_{n+1}..A_1}(φ̄ reversed)(X_n*, ..., X_1*).
    For real φ, Hermitian X_i and equal spectra this is Γ(φ reversed)(X_n, ..., X_1).
    """
    values = materialize_kernel(kernel, spectra)
    reversed_values = np.conj(np.transpose(values, axes=tuple(reversed(range(values.ndim)))))
    lhs = _apply(kernel, spectra, operands).adjoint()
    rhs = _apply(GridKernel(reversed_values), list(reversed(spectra)),
                 [ComplexMatrix.coerce(x).adjoint() for x in reversed(operands)])
    return IdentityResidual(lhs, rhs, p)


def moi_linearity_check(kernel_a: MOIKernel, kernel_b: MOIKernel, weight: float,
                        spectra: Sequence[EigenDecomposition], operands: Sequence[ComplexMatrix],
                        slot: Optional[int] = None, other: Optional[ComplexMatrix] = None,
                        p=None) -> IdentityResidual:
    """
    Linearity of Γ: in the kernel (w φa + (1-w) φb), or, when ``slot`` and
    ``other`` are given, in operand ``slot`` (w X + (1-w) X') for kernel_a.
    """
    if slot is None:
        mixed = weight * materialize_kernel(kernel_a, spectra) + (1.0 - weight) * materialize_kernel(kernel_b, spectra)
        lhs = _apply(GridKernel(mixed), spectra, operands)
        rhs = _apply(kernel_a, spectra, operands) * weight + _apply(kernel_b, spectra, operands) * (1.0 - weight)
        return IdentityResidual(lhs, rhs, p)

    swapped = list(operands)
    swapped[slot - 1] = other
    mixed_operands = list(operands)
    mixed_operands[slot - 1] = ComplexMatrix.coerce(operands[slot - 1]) * weight + ComplexMatrix.coerce(other) * (1.0 - weight)
    lhs = _apply(kernel_a, spectra, mixed_operands)
    rhs = _apply(kernel_a, spectra, operands) * weight + _apply(kernel_a, spectra, swapped) * (1.0 - weight)
    return IdentityResidual(lhs, rhs, p)
