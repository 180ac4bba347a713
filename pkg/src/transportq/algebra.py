"""Dense complex matrix algebra: the finite-dimensional operator algebra
that every other module builds on.

Values are immutable wrappers around complex128 arrays.  Structural
invariants (squareness, finiteness, hermiticity, unitarity) are checked
once at construction; all operations are pure functions.
"""

from __future__ import annotations

import numbers

import numpy as np

from . import _kernels
from .errors import DimensionMismatchError, InvariantViolationError

#: Largest algebra dimension supported.  Everything the engine verifies
#: holds in the full matrix algebra at this scale, and every tolerance
#: below was chosen for it.
MAX_DIM = 64

#: Max-entry deviation from the conjugate transpose allowed at
#: ``HermitianMatrix`` construction, relative to the operator norm.
HERMITICITY_RTOL = 1e-12

#: Operator-norm defect of ``U*U - I`` allowed at ``UnitaryMatrix``
#: construction and at every accumulated transport point.
UNITARITY_TOL = 1e-10

#: Guaranteed relative accuracy of ``operator_norm``.
NORM_RTOL = 1e-10


class ComplexMatrix:
    """Immutable square complex matrix; the algebra element type.

    Entries are stored as a read-only C-contiguous complex128 array.
    Construction rejects non-square shapes, dimensions outside
    [1, MAX_DIM], and non-finite entries.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries):
        if isinstance(entries, ComplexMatrix):
            entries = entries.entries
        arr = np.array(entries, dtype=np.complex128, order="C")
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvariantViolationError(
                f"expected a square matrix, got shape {arr.shape}"
            )
        if arr.shape[0] < 1:
            raise InvariantViolationError("dimension must be at least 1")
        if arr.shape[0] > MAX_DIM:
            raise InvariantViolationError(
                f"dimension {arr.shape[0]} exceeds the supported maximum {MAX_DIM}"
            )
        if not np.all(np.isfinite(arr)):
            raise InvariantViolationError("matrix has non-finite entries")
        arr.setflags(write=False)
        self._entries = arr

    @property
    def entries(self) -> np.ndarray:
        """The underlying read-only (dim, dim) complex128 array."""
        return self._entries

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    def _require_same_dim(self, other: "ComplexMatrix") -> None:
        if self.dim != other.dim:
            raise DimensionMismatchError(
                f"incompatible operands: dim {self.dim} vs {other.dim}"
            )

    def __matmul__(self, other):
        if not isinstance(other, ComplexMatrix):
            return NotImplemented
        self._require_same_dim(other)
        return ComplexMatrix(self._entries @ other._entries)

    def __add__(self, other):
        if not isinstance(other, ComplexMatrix):
            return NotImplemented
        self._require_same_dim(other)
        return ComplexMatrix(self._entries + other._entries)

    def __sub__(self, other):
        if not isinstance(other, ComplexMatrix):
            return NotImplemented
        self._require_same_dim(other)
        return ComplexMatrix(self._entries - other._entries)

    def __neg__(self):
        return ComplexMatrix(-self._entries)

    def __mul__(self, scalar):
        if not isinstance(scalar, numbers.Number):
            return NotImplemented
        return ComplexMatrix(self._entries * complex(scalar))

    __rmul__ = __mul__

    def __array__(self, dtype=None, copy=None):
        if dtype is not None and dtype != np.complex128:
            return self._entries.astype(dtype)
        if copy:
            return self._entries.copy()
        return self._entries

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class HermitianMatrix(ComplexMatrix):
    """A self-adjoint matrix; generators of derivations and transports.

    Construction additionally requires the max-entry deviation from the
    conjugate transpose to be at most HERMITICITY_RTOL times the
    operator norm.
    """

    __slots__ = ()

    def __init__(self, entries):
        super().__init__(entries)
        arr = self._entries
        dev = np.abs(arr - arr.conj().T)
        deviation = dev.max()
        bound = HERMITICITY_RTOL * np.linalg.norm(arr, 2)
        if deviation > bound:
            # |dev| is symmetric, so report the lower-triangle entry.
            i, j = np.unravel_index(np.argmax(np.tril(dev)), arr.shape)
            raise InvariantViolationError(
                f"matrix is not Hermitian at ({i}, {j}): "
                f"max deviation {deviation:.3e} exceeds {bound:.3e}"
            )


class UnitaryMatrix(ComplexMatrix):
    """A unitary matrix; one-step propagators and transport values.

    Construction additionally requires the operator-norm defect of
    ``adjoint(U) @ U - I`` to be at most UNITARITY_TOL.
    """

    __slots__ = ()

    def __init__(self, entries):
        super().__init__(entries)
        arr = self._entries
        defect = np.linalg.norm(
            arr.conj().T @ arr - np.eye(self.dim), 2
        )
        if not defect <= UNITARITY_TOL:
            raise InvariantViolationError(
                f"unitarity defect {defect:.3e} exceeds {UNITARITY_TOL:.1e}"
            )


def as_complex_matrix(value) -> ComplexMatrix:
    """Coerce an array-like or ComplexMatrix to a ComplexMatrix."""
    if isinstance(value, ComplexMatrix):
        return value
    return ComplexMatrix(value)


def adjoint(a) -> ComplexMatrix:
    """Conjugate transpose.  An involution: adjoint(adjoint(a)) == a."""
    a = as_complex_matrix(a)
    return ComplexMatrix(a.entries.conj().T)


def commutator(a, b) -> ComplexMatrix:
    """a @ b - b @ a."""
    a = as_complex_matrix(a)
    b = as_complex_matrix(b)
    a._require_same_dim(b)
    return ComplexMatrix(a.entries @ b.entries - b.entries @ a.entries)


def operator_norm(a) -> float:
    """Largest singular value (spectral norm)."""
    a = as_complex_matrix(a)
    return float(np.linalg.norm(a.entries, 2))


def matrix_exp(a) -> ComplexMatrix:
    """Matrix exponential by scaling-and-squaring.

    Relative operator-norm error is below 1e-12 for ||a|| <= 10.  The
    kernel is the compiled Pade-13 routine when available, otherwise
    scipy's expm.
    """
    a = as_complex_matrix(a)
    return ComplexMatrix(_kernels.expm(a.entries))


def check_cstar_identity(a) -> float:
    """Relative defect of the C*-identity ||a* a|| == ||a||^2.

    Returns |  ||a* a|| - ||a||^2  | / max(1, ||a||^2); a sanity check
    on the norm implementation, zero up to roundoff.
    """
    a = as_complex_matrix(a)
    norm_a = operator_norm(a)
    norm_ast_a = float(np.linalg.norm(a.entries.conj().T @ a.entries, 2))
    return abs(norm_ast_a - norm_a**2) / max(1.0, norm_a**2)


def identity(dim: int) -> ComplexMatrix:
    """The identity element of the dim-dimensional algebra."""
    return ComplexMatrix(np.eye(dim))


#: The three Pauli matrices, the standard 2x2 Hermitian test set.
SIGMA_X = HermitianMatrix([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Y = HermitianMatrix([[0.0, -1.0j], [1.0j, 0.0]])
SIGMA_Z = HermitianMatrix([[1.0, 0.0], [0.0, -1.0]])
