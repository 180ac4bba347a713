"""Inner derivations a -> i[H, a], their superoperator realization, and
the one-parameter automorphism groups they generate.

The superoperator path exists as an independent cross-check: production
evolution always conjugates by unitaries, which is exactly isometric.
The global vectorization convention is column stacking, so that

    vec(i[H, a]) = i (I (x) H  -  H^T (x) I) vec(a).
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .algebra import (
    ComplexMatrix,
    HermitianMatrix,
    as_complex_matrix,
    matrix_exp,
    operator_norm,
)
from .errors import DimensionMismatchError, InvariantViolationError


def vec(a) -> np.ndarray:
    """Column-stack a matrix into a length-n^2 vector."""
    a = as_complex_matrix(a)
    return a.entries.reshape(-1, order="F")


def unvec(v, dim: int) -> ComplexMatrix:
    """Inverse of :func:`vec` for a dim x dim matrix."""
    v = np.asarray(v, dtype=np.complex128)
    if v.size != dim * dim:
        raise DimensionMismatchError(
            f"vector of length {v.size} is not a stacked {dim}x{dim} matrix"
        )
    return ComplexMatrix(v.reshape((dim, dim), order="F"))


class InnerDerivation:
    """The derivation delta(a) = i [H, a] defined by a Hermitian generator."""

    __slots__ = ("_generator",)

    def __init__(self, generator):
        if not isinstance(generator, HermitianMatrix):
            generator = HermitianMatrix(
                generator.entries
                if isinstance(generator, ComplexMatrix)
                else generator
            )
        self._generator = generator

    @property
    def generator(self) -> HermitianMatrix:
        return self._generator

    @property
    def dim(self) -> int:
        return self._generator.dim

    def __repr__(self):
        return f"InnerDerivation(dim={self.dim})"


class Superoperator:
    """A linear map on matrices, stored as an n^2 x n^2 matrix acting on
    column-stacked operands."""

    __slots__ = ("_dim", "_entries")

    def __init__(self, dim: int, entries):
        arr = np.array(entries, dtype=np.complex128, order="C")
        if arr.shape != (dim * dim, dim * dim):
            raise InvariantViolationError(
                f"expected shape {(dim * dim, dim * dim)}, got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise InvariantViolationError("superoperator has non-finite entries")
        arr.setflags(write=False)
        self._dim = dim
        self._entries = arr

    @property
    def dim(self) -> int:
        """Dimension n of the matrices acted on (entries are n^2 x n^2)."""
        return self._dim

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    def apply(self, a) -> ComplexMatrix:
        """Apply to a matrix: unvec(S @ vec(a))."""
        a = as_complex_matrix(a)
        if a.dim != self._dim:
            raise DimensionMismatchError(
                f"superoperator acts on dim {self._dim}, got {a.dim}"
            )
        return unvec(self._entries @ vec(a), self._dim)

    def norm(self) -> float:
        """Largest singular value of the n^2 x n^2 matrix."""
        return float(np.linalg.norm(self._entries, 2))

    def expm(self, scale: complex = 1.0) -> "Superoperator":
        """exp(scale * S) as a superoperator."""
        return Superoperator(self._dim, _kernels.expm(scale * self._entries))

    def __repr__(self):
        return f"Superoperator(dim={self._dim})"


def _check_dims(d: InnerDerivation, *mats: ComplexMatrix) -> None:
    for m in mats:
        if m.dim != d.dim:
            raise DimensionMismatchError(
                f"derivation has dim {d.dim}, operand has dim {m.dim}"
            )


def apply_derivation(d: InnerDerivation, a) -> ComplexMatrix:
    """i (H a - a H) for the derivation's generator H."""
    a = as_complex_matrix(a)
    _check_dims(d, a)
    h = d.generator.entries
    return ComplexMatrix(1j * (h @ a.entries - a.entries @ h))


def check_leibniz(d: InnerDerivation, a, b) -> float:
    """Relative defect of delta(ab) = delta(a) b + a delta(b).

    Exact in exact arithmetic; the returned value is pure roundoff,
    normalized by max(1, ||a|| ||b||).
    """
    a = as_complex_matrix(a)
    b = as_complex_matrix(b)
    _check_dims(d, a, b)
    a._require_same_dim(b)
    lhs = apply_derivation(d, a @ b).entries
    rhs = apply_derivation(d, a).entries @ b.entries
    rhs = rhs + a.entries @ apply_derivation(d, b).entries
    scale = max(1.0, operator_norm(a) * operator_norm(b))
    return float(np.linalg.norm(lhs - rhs, 2)) / scale


def check_star_compatibility(d: InnerDerivation, a) -> float:
    """Relative defect of delta(a*) = delta(a)*, normalized by max(1, ||a||)."""
    a = as_complex_matrix(a)
    _check_dims(d, a)
    lhs = apply_derivation(d, ComplexMatrix(a.entries.conj().T)).entries
    rhs = apply_derivation(d, a).entries.conj().T
    return float(np.linalg.norm(lhs - rhs, 2)) / max(1.0, operator_norm(a))


def derivation_superoperator(d: InnerDerivation) -> Superoperator:
    """The derivation as an n^2 x n^2 matrix on column-stacked operands.

    S = i (I (x) H - H^T (x) I), so that S @ vec(a) = vec(i [H, a]).
    Its norm is bounded by 2 ||H||, with equality witnessed e.g. by the
    Pauli z generator.
    """
    h = d.generator.entries
    eye = np.eye(d.dim)
    s = 1j * (np.kron(eye, h) - np.kron(h.T, eye))
    return Superoperator(d.dim, s)


def one_parameter_group(d: InnerDerivation, r: float, a) -> ComplexMatrix:
    """The automorphism g_r(a) = exp(i r H) a exp(-i r H).

    These maps satisfy g_0 = id, the group law g_{r+s} = g_r g_s, and
    exp(r * derivation_superoperator(d)) on stacked matrices.
    """
    a = as_complex_matrix(a)
    _check_dims(d, a)
    if not np.isfinite(r):
        raise ValueError("group parameter must be finite")
    u = matrix_exp(1j * float(r) * d.generator).entries
    return ComplexMatrix(u @ a.entries @ u.conj().T)


def check_group_vs_superoperator(d: InnerDerivation, r: float, a) -> float:
    """Gap between exp(r S) on vec(a) and conjugation by exp(i r H).

    The two sides agree exactly in exact arithmetic; the returned
    operator-norm gap, normalized by max(1, ||a||), is the combined
    exponential-kernel error of both routes.
    """
    a = as_complex_matrix(a)
    _check_dims(d, a)
    s = derivation_superoperator(d)
    via_superop = unvec(
        _kernels.expm(float(r) * s.entries) @ vec(a), d.dim
    ).entries
    via_group = one_parameter_group(d, r, a).entries
    gap = float(np.linalg.norm(via_superop - via_group, 2))
    return gap / max(1.0, operator_norm(a))
