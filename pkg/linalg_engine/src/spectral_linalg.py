#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Spectral Linear Algebra - dense complex matrices and their spectral data

This module is the substrate for every spectral construction in the project:
immutable complex and Hermitian matrix types, a cyclic Jacobi eigensolver for
complex Hermitian matrices, functional calculus f(H) = U diag(f(λ)) U*,
singular values and Schatten p-norms.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, Union

import numpy as np

from calculus_errors import DimMismatchError, EvalError, InvalidPError, NonConvergenceError
from engine_config import load_engine_config

logger = logging.getLogger(__name__)

SOLVER_DEFAULTS = {
    'jacobi': {
        'offdiag_rtol': 1e-13,
        'max_sweeps': 60,
    },
}

# off-diagonal pivots at or below this fraction of |a_pp| + |a_qq| are set to zero
NEGLIGIBLE_PIVOT = 1e-2 * np.finfo(np.float64).eps


def _solver_config() -> Dict[str, Any]:
    return load_engine_config('linalg_engine', 'solver', SOLVER_DEFAULTS)


class ComplexMatrix:
    """
    Immutable dense complex matrix (row-major, complex128 entries).

    The underlying array is copied on construction and marked read-only,
    so instances can be shared freely between threads.
    """

    __slots__ = ('_array',)

    def __init__(self, data: Any):
        array = np.array(data, dtype=np.complex128)
        if array.ndim == 1 and array.size == 1:
            array = array.reshape(1, 1)
        if array.ndim != 2 or array.shape[0] < 1 or array.shape[1] < 1:
            raise DimMismatchError(f"Expected a non-empty 2-D array, got shape {array.shape}")
        if not np.all(np.isfinite(array)):
            raise EvalError("Matrix entries must be finite (no NaN or Inf)")
        array.setflags(write=False)
        self._array = array

    @classmethod
    def coerce(cls, value: Union['ComplexMatrix', Any]) -> 'ComplexMatrix':
        """Return ``value`` unchanged if it is already a ComplexMatrix, else wrap it."""
        if isinstance(value, ComplexMatrix):
            return value
        return cls(value)

    @classmethod
    def identity(cls, dim: int) -> 'ComplexMatrix':
        return cls(np.eye(dim, dtype=np.complex128))

    @classmethod
    def zeros(cls, rows: int, cols: int = None) -> 'ComplexMatrix':
        return cls(np.zeros((rows, rows if cols is None else cols), dtype=np.complex128))

    @property
    def array(self) -> np.ndarray:
        """Read-only view of the entries."""
        return self._array

    @property
    def rows(self) -> int:
        return self._array.shape[0]

    @property
    def cols(self) -> int:
        return self._array.shape[1]

    @property
    def shape(self):
        return self._array.shape

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def adjoint(self) -> 'ComplexMatrix':
        return ComplexMatrix(self._array.conj().T)

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self._array))

    def commutator(self, other: 'ComplexMatrix') -> 'ComplexMatrix':
        other = ComplexMatrix.coerce(other)
        return ComplexMatrix(self._array @ other.array - other.array @ self._array)

    def __matmul__(self, other: 'ComplexMatrix') -> 'ComplexMatrix':
        other = ComplexMatrix.coerce(other)
        if self.cols != other.rows:
            raise DimMismatchError(f"Cannot multiply {self.shape} by {other.shape}")
        return ComplexMatrix(self._array @ other.array)

    def __add__(self, other: 'ComplexMatrix') -> 'ComplexMatrix':
        other = ComplexMatrix.coerce(other)
        if self.shape != other.shape:
            raise DimMismatchError(f"Cannot add {self.shape} and {other.shape}")
        return ComplexMatrix(self._array + other.array)

    def __sub__(self, other: 'ComplexMatrix') -> 'ComplexMatrix':
        other = ComplexMatrix.coerce(other)
        if self.shape != other.shape:
            raise DimMismatchError(f"Cannot subtract {other.shape} from {self.shape}")
        return ComplexMatrix(self._array - other.array)

    def __mul__(self, scalar: complex) -> 'ComplexMatrix':
        return ComplexMatrix(self._array * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> 'ComplexMatrix':
        return ComplexMatrix(-self._array)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(rows={self.rows}, cols={self.cols})"

    def to_json_dict(self) -> Dict[str, Any]:
        """Serialize to the matrix file format ``{"rows", "cols", "re", "im"}``."""
        flat = self._array.reshape(-1)
        return {
            'rows': self.rows,
            'cols': self.cols,
            're': [float(x) for x in flat.real],
            'im': [float(x) for x in flat.imag],
        }

    @classmethod
    def from_json_dict(cls, payload: Dict[str, Any]) -> 'ComplexMatrix':
        """Parse the matrix file format; lengths of ``re`` and ``im`` must equal rows*cols."""
        try:
            rows = int(payload['rows'])
            cols = int(payload['cols'])
            re = np.asarray(payload['re'], dtype=np.float64)
            im = np.asarray(payload.get('im', [0.0] * (rows * cols)), dtype=np.float64)
        except (KeyError, TypeError, ValueError) as e:
            raise DimMismatchError(f"Malformed matrix payload: {e}")
        if rows < 1 or cols < 1 or re.size != rows * cols or im.size != rows * cols:
            raise DimMismatchError(
                f"Matrix payload declares {rows}x{cols} but carries {re.size} real and {im.size} imaginary entries"
            )
        return cls((re + 1j * im).reshape(rows, cols))


class HermitianMatrix(ComplexMatrix):
    """
    Complex Hermitian matrix. The constructor symmetrizes H <- (H + H*)/2
    and zeroes the imaginary parts of the diagonal.
    """

    __slots__ = ()

    def __init__(self, data: Any):
        array = ComplexMatrix.coerce(data).array
        if array.shape[0] != array.shape[1]:
            raise DimMismatchError(f"Hermitian matrix must be square, got shape {array.shape}")
        symmetric = 0.5 * (array + array.conj().T)
        np.fill_diagonal(symmetric, symmetric.diagonal().real)
        super().__init__(symmetric)

    @property
    def dim(self) -> int:
        return self.rows

    def __add__(self, other):
        result = super().__add__(other)
        return HermitianMatrix(result) if isinstance(other, HermitianMatrix) else result

    def __sub__(self, other):
        result = super().__sub__(other)
        return HermitianMatrix(result) if isinstance(other, HermitianMatrix) else result

    def __mul__(self, scalar):
        result = super().__mul__(scalar)
        return HermitianMatrix(result) if np.isrealobj(scalar) else result

    __rmul__ = __mul__


class EigenDecomposition:
    """
    Spectral data of a Hermitian matrix: ascending eigenvalues and a unitary
    whose columns are the matching eigenvectors.
    """

    __slots__ = ('_eigenvalues', '_unitary')

    def __init__(self, eigenvalues: Iterable[float], unitary: ComplexMatrix):
        values = np.array(eigenvalues, dtype=np.float64)
        unitary = ComplexMatrix.coerce(unitary)
        if values.ndim != 1 or unitary.shape != (values.size, values.size):
            raise DimMismatchError(
                f"{values.size} eigenvalues do not match a unitary of shape {unitary.shape}"
            )
        values.setflags(write=False)
        self._eigenvalues = values
        self._unitary = unitary

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._eigenvalues

    @property
    def unitary(self) -> ComplexMatrix:
        return self._unitary

    @property
    def dim(self) -> int:
        return self._eigenvalues.size

    def spectral_apply(self, values: np.ndarray) -> ComplexMatrix:
        """Return U diag(values) U* for values given per eigenvalue."""
        u = self._unitary.array
        return ComplexMatrix((u * np.asarray(values)) @ u.conj().T)

    def reconstruct(self) -> ComplexMatrix:
        return self.spectral_apply(self._eigenvalues)

    def __repr__(self) -> str:
        return f"EigenDecomposition(dim={self.dim}, range=[{self._eigenvalues[0]:.6g}, {self._eigenvalues[-1]:.6g}])"


class SchattenIndex:
    """Schatten exponent p in [1, inf]; ``math.inf`` encodes the operator norm."""

    __slots__ = ('_p',)

    def __init__(self, p: Union[float, str, 'SchattenIndex']):
        if isinstance(p, SchattenIndex):
            p = p.p
        if isinstance(p, str):
            p = math.inf if p.strip().lower() in ('inf', 'infinity', '∞') else float(p)
        p = float(p)
        if math.isnan(p) or p < 1.0:
            raise InvalidPError(f"Schatten exponent must satisfy p >= 1, got {p}")
        self._p = p

    @property
    def p(self) -> float:
        return self._p

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self._p)

    @property
    def in_open_range(self) -> bool:
        """Whether p lies in (1, inf), the range where the perturbation theorems hold."""
        return 1.0 < self._p < math.inf

    def scaled(self, factor: int) -> 'SchattenIndex':
        """The index n*p used for operands of an order-n integral."""
        return SchattenIndex(self._p * factor)

    def __eq__(self, other) -> bool:
        return isinstance(other, SchattenIndex) and other.p == self._p

    def __hash__(self) -> int:
        return hash(self._p)

    def __repr__(self) -> str:
        return f"SchattenIndex({'inf' if self.is_infinite else self._p})"


def _off_diagonal_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(a.diagonal())))


def _jacobi_rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    # Unitary J with J[p,p] = J[q,q] = c, J[p,q] = s e^{iθ}, J[q,p] = -s e^{-iθ}
    # chosen so that (J* A J)[p,q] = 0; A and V are updated in place.
    apq = a[p, q]
    r = abs(apq)
    # tau and phase below need a normal, non-negligible pivot
    if r <= NEGLIGIBLE_PIVOT * (abs(a[p, p].real) + abs(a[q, q].real)) or r < np.finfo(np.float64).tiny:
        a[p, q] = 0.0
        a[q, p] = 0.0
        return
    phase = apq / r
    tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
    t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau) + math.hypot(1.0, tau))
    c = 1.0 / math.sqrt(1.0 + t * t)
    sp = t * c * phase
    spc = sp.conjugate()

    col_p = a[:, p].copy()
    a[:, p] = c * col_p - spc * a[:, q]
    a[:, q] = sp * col_p + c * a[:, q]

    row_p = a[p, :].copy()
    a[p, :] = c * row_p - sp * a[q, :]
    a[q, :] = spc * row_p + c * a[q, :]

    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real

    vec_p = v[:, p].copy()
    v[:, p] = c * vec_p - spc * v[:, q]
    v[:, q] = sp * vec_p + c * v[:, q]


def eigh(h: Union[HermitianMatrix, Any]) -> EigenDecomposition:
    """
    Diagonalize a Hermitian matrix with cyclic complex Jacobi sweeps.

    Sweeps run until the off-diagonal Frobenius norm is at most
    ``offdiag_rtol * ||H||_F``. Eigenvalues are returned ascending; equal
    values keep the order in which the sweeps left them.

    Args:
        h: Hermitian matrix (anything else is symmetrized first)

    Returns:
        EigenDecomposition: eigenvalues ascending, eigenvectors as columns

    Raises:
        NonConvergenceError: if ``max_sweeps`` sweeps do not reach the tolerance
    """
    if not isinstance(h, HermitianMatrix):
        h = HermitianMatrix(h)
    config = _solver_config()['jacobi']
    a = np.array(h.array, dtype=np.complex128)
    dim = a.shape[0]
    v = np.eye(dim, dtype=np.complex128)

    target = float(config['offdiag_rtol']) * float(np.linalg.norm(a))
    max_sweeps = int(config['max_sweeps'])
    off = _off_diagonal_norm(a)
    sweeps = 0
    while off > target:
        if sweeps >= max_sweeps:
            logger.error(f"Jacobi stalled at off-diagonal norm {off:.3e} (target {target:.3e}, dim {dim})")
            raise NonConvergenceError(sweeps, off, target)
        for p in range(dim - 1):
            for q in range(p + 1, dim):
                _jacobi_rotate(a, v, p, q)
        sweeps += 1
        off = _off_diagonal_norm(a)

    logger.debug(f"Jacobi converged in {sweeps} sweeps (dim {dim}, off-diagonal {off:.3e})")
    values = a.diagonal().real
    order = np.argsort(values, kind='stable')
    return EigenDecomposition(values[order], ComplexMatrix(v[:, order]))


def mat_func(f, decomposition: EigenDecomposition) -> ComplexMatrix:
    """
    Spectral calculus: return U diag(f(λ_i)) U*.

    Args:
        f: Function model exposing ``eval_deriv(order, x)``
        decomposition: Spectral data of the matrix argument

    Raises:
        EvalError: if f is not finite at some eigenvalue
    """
    values = np.asarray(f.eval_deriv(0, decomposition.eigenvalues))
    if not np.all(np.isfinite(values)):
        raise EvalError(f"{f} is not finite on the spectrum {decomposition.eigenvalues}")
    return decomposition.spectral_apply(values)


def singular_values(x: Union[ComplexMatrix, Any]) -> np.ndarray:
    """
    Singular values in descending order, computed as square roots of the
    eigenvalues of X*X (tiny negative eigenvalues are clamped to 0).
    """
    x = ComplexMatrix.coerce(x)
    gram = HermitianMatrix(x.array.conj().T @ x.array)
    squares = np.clip(eigh(gram).eigenvalues, 0.0, None)
    return np.sqrt(squares)[::-1]


def schatten_norm(x: Union[ComplexMatrix, Any], p: Union[SchattenIndex, float, str]) -> float:
    """
    Schatten p-norm (sum σ_i^p)^(1/p); the largest singular value when p is infinite.

    Raises:
        InvalidPError: if p < 1
    """
    index = SchattenIndex(p)
    sigma = singular_values(x)
    largest = float(sigma[0]) if sigma.size else 0.0
    if index.is_infinite or largest == 0.0:
        return largest
    # Scale by the largest value to keep sigma**p in range.
    return largest * float(np.sum((sigma / largest) ** index.p) ** (1.0 / index.p))


def load_matrix(path: Union[str, Path]) -> ComplexMatrix:
    """Read a matrix file (JSON ``{"rows", "cols", "re", "im"}``)."""
    with open(path, 'r') as file:
        payload = json.load(file)
    logger.debug(f"Loaded {payload.get('rows')}x{payload.get('cols')} matrix from {path}")
    return ComplexMatrix.from_json_dict(payload)


def save_matrix(matrix: ComplexMatrix, path: Union[str, Path]) -> None:
    """Write a matrix file in the JSON matrix format."""
    with open(path, 'w') as file:
        json.dump(ComplexMatrix.coerce(matrix).to_json_dict(), file)
