#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
MOI Contraction - multiple operator integrals at finite dimension

Γ^{A_1,...,A_{n+1}}(φ)(X_1, ..., X_n) is computed in the eigenbases of the
A_k: with Ỹ_k = U_k* X_k U_{k+1},

    Y[i_0, i_n] = sum over i_1..i_{n-1} of φ(λ¹_{i_0}, ..., λ^{n+1}_{i_n}) Ỹ_1[i_0,i_1] ... Ỹ_n[i_{n-1},i_n]

and the result is U_1 Y U_{n+1}*. Every kernel variant is first materialized
into a dense value tensor, so all variants share one contraction path.
"""

import itertools
import logging
import math
from functools import reduce
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from calculus_errors import DimMismatchError, EvalError
from ddiff_engine.src.divided_differences import DividedDifferenceEvaluator, divided_difference
from funcmodel_engine.src.function_models import FunctionModel
from linalg_engine.src.spectral_linalg import (
    ComplexMatrix,
    EigenDecomposition,
    SchattenIndex,
    schatten_norm,
)

logger = logging.getLogger(__name__)

LARGE_KERNEL_ENTRIES = 10 ** 7
KERNEL_CHUNK = 1 << 16


class MOIKernel:
    """
    A symbol φ on eigenvalue tuples (λ¹, ..., λ^{n+1}) of order n.

    Subclasses provide ``materialize`` (dense tensor over the index grid)
    and ``entry`` (a single value, used by the brute-force oracle).
    """

    kind = 'abstract'

    def __init__(self, order: int):
        if order < 0:
            raise ValueError(f"Kernel order must be non-negative, got {order}")
        self.order = int(order)

    def materialize(self, spectra: Sequence[EigenDecomposition]) -> np.ndarray:
        raise NotImplementedError

    def entry(self, index: Tuple[int, ...], spectra: Sequence[EigenDecomposition]) -> complex:
        raise NotImplementedError

    @property
    def is_real(self) -> bool:
        return True

    def __repr__(self) -> str:
        return f"{type(self).__name__}(order={self.order})"


class DividedDifferenceKernel(MOIKernel):
    """φ = f^[n], evaluated on the whole eigenvalue grid at once."""

    kind = 'divided_difference'

    def __init__(self, f: FunctionModel, order: int):
        super().__init__(order)
        self.f = f

    @property
    def is_real(self) -> bool:
        return self.f.is_real

    def materialize(self, spectra):
        _check_spectra(self, spectra)
        evaluator = DividedDifferenceEvaluator(self.f)
        eigenvalues = [decomposition.eigenvalues for decomposition in spectra]
        shape = tuple(values.size for values in eigenvalues)
        size = math.prod(shape)
        if size > LARGE_KERNEL_ENTRIES:
            logger.warning(f"Materializing {size} divided-difference entries for {self.f}")

        flat = np.empty(size, dtype=np.complex128)
        for start in range(0, size, KERNEL_CHUNK):
            index = np.unravel_index(np.arange(start, min(start + KERNEL_CHUNK, size)), shape)
            rows = np.stack([values[i] for values, i in zip(eigenvalues, index)], axis=1)
            flat[start:start + rows.shape[0]] = evaluator.evaluate_rows(rows)
        logger.debug(f"{self.f}^[{self.order}]: {size} entries")
        return flat.reshape(shape)

    def entry(self, index, spectra):
        nodes = [spectra[k].eigenvalues[i] for k, i in enumerate(index)]
        return complex(divided_difference(self.f, nodes))

    def __repr__(self):
        return f"DividedDifferenceKernel({self.f}, order={self.order})"


class GridKernel(MOIKernel):
    """φ given as an explicit value tensor of shape (d_1, ..., d_{n+1})."""

    kind = 'grid'

    def __init__(self, values):
        values = np.array(values, dtype=np.complex128)
        if values.ndim < 1:
            raise DimMismatchError("A grid kernel needs at least one index dimension")
        if not np.all(np.isfinite(values)):
            raise EvalError("Grid kernel values must be finite")
        values.setflags(write=False)
        super().__init__(values.ndim - 1)
        self.values = values

    @property
    def is_real(self) -> bool:
        return not np.any(self.values.imag)

    def materialize(self, spectra):
        _check_spectra(self, spectra)
        dims = tuple(decomposition.dim for decomposition in spectra)
        if dims != self.values.shape:
            raise DimMismatchError(f"Grid kernel of shape {self.values.shape} used on spectra of sizes {dims}")
        return self.values

    def entry(self, index, spectra):
        return complex(self.values[index])

    def __repr__(self):
        return f"GridKernel(shape={self.values.shape})"


class TensorProductKernel(MOIKernel):
    """φ = g_1 ⊗ ... ⊗ g_{n+1}, with g_k given by its values on the k-th spectrum."""

    kind = 'tensor_product'

    def __init__(self, factors: Sequence):
        if not factors:
            raise ValueError("A tensor product kernel needs at least one factor")
        arrays = []
        for factor in factors:
            array = np.array(factor, dtype=np.complex128).reshape(-1)
            if not np.all(np.isfinite(array)):
                raise EvalError("Tensor product factor values must be finite")
            array.setflags(write=False)
            arrays.append(array)
        super().__init__(len(arrays) - 1)
        self.factors = arrays

    @classmethod
    def from_functions(cls, models: Sequence[FunctionModel],
                       spectra: Sequence[EigenDecomposition]) -> 'TensorProductKernel':
        """g_k = f_k evaluated on the eigenvalues of the k-th spectrum."""
        if len(models) != len(spectra):
            raise DimMismatchError(f"{len(models)} factor functions for {len(spectra)} spectra")
        return cls([np.asarray(f.eval_deriv(0, s.eigenvalues)) for f, s in zip(models, spectra)])

    @property
    def is_real(self) -> bool:
        return not any(np.any(factor.imag) for factor in self.factors)

    def materialize(self, spectra):
        _check_spectra(self, spectra)
        dims = tuple(decomposition.dim for decomposition in spectra)
        if dims != tuple(factor.size for factor in self.factors):
            raise DimMismatchError(f"Tensor factors of sizes {[f.size for f in self.factors]} used on spectra {dims}")
        return reduce(np.multiply.outer, self.factors)

    def entry(self, index, spectra):
        return complex(math.prod(complex(factor[i]) for factor, i in zip(self.factors, index)))

    def __repr__(self):
        return f"TensorProductKernel(order={self.order})"


def _check_spectra(kernel: MOIKernel, spectra: Sequence[EigenDecomposition]) -> None:
    if len(spectra) != kernel.order + 1:
        raise DimMismatchError(f"{kernel!r} needs {kernel.order + 1} spectra, got {len(spectra)}")


def materialize_kernel(kernel: MOIKernel, spectra: Sequence[EigenDecomposition]) -> np.ndarray:
    """Dense value tensor of ``kernel`` on the eigenvalue grid of ``spectra``."""
    return kernel.materialize(spectra)


class MOIRequest:
    """
    The data of Γ^{A_1,...,A_{n+1}}(φ)(X_1, ..., X_n): a kernel of order n,
    n+1 spectra and n square operands, all of one dimension d.
    """

    __slots__ = ('kernel', 'spectra', 'operands')

    def __init__(self, kernel: MOIKernel, spectra: Sequence[EigenDecomposition],
                 operands: Sequence[Union[ComplexMatrix, np.ndarray]]):
        spectra = list(spectra)
        operands = [ComplexMatrix.coerce(x) for x in operands]
        if len(spectra) != kernel.order + 1:
            raise DimMismatchError(f"Order-{kernel.order} kernel needs {kernel.order + 1} spectra, got {len(spectra)}")
        if len(operands) != kernel.order:
            raise DimMismatchError(f"Order-{kernel.order} kernel needs {kernel.order} operands, got {len(operands)}")
        dim = spectra[0].dim
        if any(decomposition.dim != dim for decomposition in spectra):
            raise DimMismatchError(f"Spectra have differing dimensions {[s.dim for s in spectra]}")
        if any(x.shape != (dim, dim) for x in operands):
            raise DimMismatchError(f"Operands {[x.shape for x in operands]} do not match dimension {dim}")
        self.kernel = kernel
        self.spectra = spectra
        self.operands = operands

    @property
    def dim(self) -> int:
        return self.spectra[0].dim

    @property
    def order(self) -> int:
        return self.kernel.order


def moi_apply(request: MOIRequest) -> ComplexMatrix:
    """
    Contract the kernel against the rotated operands Ỹ_k = U_k* X_k U_{k+1}.

    The sum runs through a single unoptimized einsum, whose summation order
    depends only on the tensor shapes; equal kernel tensors therefore give
    bitwise-equal results.

    Raises:
        DimMismatchError: if the request is inconsistent
        OrderExceededError: from divided-difference kernels
    """
    tensor = materialize_kernel(request.kernel, request.spectra)
    n = request.order
    first = request.spectra[0].unitary.array
    if n == 0:
        return request.spectra[0].spectral_apply(tensor)

    rotated = [
        request.spectra[k].unitary.array.conj().T @ request.operands[k].array @ request.spectra[k + 1].unitary.array
        for k in range(n)
    ]
    arguments: List = [tensor, list(range(n + 1))]
    for k, y in enumerate(rotated):
        arguments.extend([y, [k, k + 1]])
    arguments.append([0, n])
    core = np.einsum(*arguments, optimize=False)

    last = request.spectra[n].unitary.array
    return ComplexMatrix(first @ core @ last.conj().T)


def moi_apply_bruteforce(request: MOIRequest) -> ComplexMatrix:
    """
    Explicit sum over all multi-indices of φ(λ_i) P¹_{i_0} X_1 P²_{i_1} ... X_n P^{n+1}_{i_n},
    with P^k_i the spectral projector u u* of the i-th eigenvector of A_k.
    Kernel values come from ``MOIKernel.entry``. Meant for d <= 4.
    """
    projectors = [
        [np.outer(s.unitary.array[:, i], s.unitary.array[:, i].conj()) for i in range(s.dim)]
        for s in request.spectra
    ]
    total = np.zeros((request.dim, request.dim), dtype=np.complex128)
    for index in itertools.product(range(request.dim), repeat=request.order + 1):
        term = projectors[0][index[0]]
        for k, x in enumerate(request.operands):
            term = term @ x.array @ projectors[k + 1][index[k + 1]]
        total = total + request.kernel.entry(index, request.spectra) * term
    return ComplexMatrix(total)


class IdentityResidual:
    """
    Comparison of two sides of a matrix identity.

    ``abs_err`` is the norm of lhs - rhs (Frobenius, or Schatten p when given),
    ``scale`` is 1 + max(|lhs|, |rhs|) and ``rel_err = abs_err / scale``.
    """

    __slots__ = ('lhs', 'rhs', 'abs_err', 'lhs_norm', 'rhs_norm', 'scale', 'rel_err')

    def __init__(self, lhs: ComplexMatrix, rhs: ComplexMatrix, p: Optional[Union[SchattenIndex, float]] = None):
        lhs = ComplexMatrix.coerce(lhs)
        rhs = ComplexMatrix.coerce(rhs)
        if lhs.shape != rhs.shape:
            raise DimMismatchError(f"Cannot compare {lhs.shape} with {rhs.shape}")
        difference = lhs - rhs
        if p is None:
            norm = ComplexMatrix.frobenius_norm
        else:
            index = SchattenIndex(p)

            def norm(x):
                return schatten_norm(x, index)
        self.lhs = lhs
        self.rhs = rhs
        self.abs_err = norm(difference)
        self.lhs_norm = norm(lhs)
        self.rhs_norm = norm(rhs)
        self.scale = 1.0 + max(self.lhs_norm, self.rhs_norm)
        self.rel_err = self.abs_err / self.scale

    @property
    def relative(self) -> float:
        """abs_err / max(|lhs|, |rhs|), zero when both sides vanish."""
        largest = max(self.lhs_norm, self.rhs_norm)
        return self.abs_err / largest if largest > 0.0 else 0.0

    def __repr__(self) -> str:
        return f"IdentityResidual(abs_err={self.abs_err:.3e}, rel_err={self.rel_err:.3e})"
