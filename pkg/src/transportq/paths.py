"""Time-dependent generator paths t -> H(t).

A path carries the sign convention with it: the evolution generator fed
to the steppers is sign * i * H(t), with sign = +1 meaning the flow
solves (d/dt - i H(t)) G = 0.

Four families are supported: a constant generator, a commuting family
f(t) * H0 with a real polynomial f, a sum of fixed Hermitian terms with
polynomial coefficients, and a sampled path with linear interpolation.
Scalar polynomials are given as ascending coefficient lists
[c0, c1, ...] meaning c0 + c1 t + c2 t^2 + ...

Every constructor validates hermiticity of its input matrices and then
stores the exact Hermitian part, so evaluations are Hermitian to the
last bit and linear combinations stay that way.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import polynomial as npoly

from .algebra import ComplexMatrix, HermitianMatrix
from .errors import DomainError, InvariantViolationError

KINDS = ("constant", "commuting", "pauli_sum", "sampled")


def _validated_hermitian(entries) -> np.ndarray:
    """Check the hermiticity invariant, then return the exact Hermitian
    part as a read-only array."""
    m = HermitianMatrix(entries).entries
    h = 0.5 * (m + m.conj().T)
    h.setflags(write=False)
    return h


def _validated_coeffs(coeffs) -> np.ndarray:
    arr = np.array(coeffs, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvariantViolationError(
            "polynomial coefficients must be a non-empty 1-D real sequence"
        )
    if not np.all(np.isfinite(arr)):
        raise InvariantViolationError("polynomial coefficients must be finite")
    arr.setflags(write=False)
    return arr


class HamiltonianPath:
    """A validated generator path.  Use the classmethod constructors."""

    __slots__ = ("_kind", "_dim", "_sign", "_terms", "_times", "_matrices")

    def __init__(self, kind, dim, sign, terms=None, times=None, matrices=None):
        if kind not in KINDS:
            raise InvariantViolationError(f"unknown path kind {kind!r}")
        if sign not in (1, -1):
            raise InvariantViolationError("sign must be +1 or -1")
        self._kind = kind
        self._dim = dim
        self._sign = int(sign)
        self._terms = terms
        self._times = times
        self._matrices = matrices

    # -- constructors ---------------------------------------------------

    @classmethod
    def constant(cls, h0, sign: int = 1) -> "HamiltonianPath":
        """H(t) = H0 for all t."""
        h = _validated_hermitian(h0)
        return cls("constant", h.shape[0], sign, terms=((h, None),))

    @classmethod
    def commuting(cls, h0, coeffs, sign: int = 1) -> "HamiltonianPath":
        """H(t) = f(t) * H0 with a real polynomial f."""
        h = _validated_hermitian(h0)
        return cls(
            "commuting", h.shape[0], sign, terms=((h, _validated_coeffs(coeffs)),)
        )

    @classmethod
    def pauli_sum(cls, terms, sign: int = 1) -> "HamiltonianPath":
        """H(t) = sum_k f_k(t) * P_k with fixed Hermitian P_k."""
        if not terms:
            raise InvariantViolationError("pauli_sum needs at least one term")
        validated = []
        dim = None
        for matrix, coeffs in terms:
            h = _validated_hermitian(matrix)
            if dim is None:
                dim = h.shape[0]
            elif h.shape[0] != dim:
                raise InvariantViolationError(
                    f"term dimensions differ: {h.shape[0]} vs {dim}"
                )
            validated.append((h, _validated_coeffs(coeffs)))
        return cls("pauli_sum", dim, sign, terms=tuple(validated))

    @classmethod
    def sampled(cls, times, matrices, sign: int = 1) -> "HamiltonianPath":
        """Linear interpolation through H(t_i) = H_i on a strictly
        increasing grid; evaluation outside the grid is an error."""
        t = np.array(times, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise InvariantViolationError("sampled path needs at least two times")
        if not np.all(np.isfinite(t)):
            raise InvariantViolationError("sample times must be finite")
        if not np.all(np.diff(t) > 0):
            raise InvariantViolationError("sample times must be strictly increasing")
        if len(matrices) != t.size:
            raise InvariantViolationError(
                f"{len(matrices)} matrices for {t.size} sample times"
            )
        hs = [_validated_hermitian(m) for m in matrices]
        dim = hs[0].shape[0]
        for h in hs[1:]:
            if h.shape[0] != dim:
                raise InvariantViolationError("sampled matrices have mixed dimensions")
        stack = np.array(hs)
        stack.setflags(write=False)
        t.setflags(write=False)
        return cls("sampled", dim, sign, times=t, matrices=stack)

    # -- basic accessors ------------------------------------------------

    @property
    def kind(self) -> str:
        return self._kind

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def sign(self) -> int:
        return self._sign

    @property
    def domain(self) -> tuple[float, float]:
        """Closed interval on which the path may be evaluated."""
        if self._kind == "sampled":
            return float(self._times[0]), float(self._times[-1])
        return (-math.inf, math.inf)

    @property
    def is_commuting_family(self) -> bool:
        """True when H(t) and H(s) commute for all t, s (constant or
        scalar multiple of one generator); these paths admit the closed
        form G(t) = exp(sign * i * F(t) * H0)."""
        return self._kind in ("constant", "commuting")

    @property
    def base_generator(self) -> HermitianMatrix:
        """H0 for commuting families."""
        if not self.is_commuting_family:
            raise InvariantViolationError(
                f"{self._kind} path has no single base generator"
            )
        return HermitianMatrix(self._terms[0][0])

    def coefficient_integral(self, t0: float, t1: float) -> float:
        """Integral of the scalar coefficient over [t0, t1] for commuting
        families (f = 1 for a constant path)."""
        return float(self.coefficient_integrals(t0, [t1])[0])

    def coefficient_integrals(self, t0: float, ts) -> np.ndarray:
        """Vectorized coefficient_integral against a common lower limit."""
        if not self.is_commuting_family:
            raise InvariantViolationError(
                f"{self._kind} path has no scalar coefficient"
            )
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        coeffs = self._terms[0][1]
        if coeffs is None:
            return ts - float(t0)
        antideriv = npoly.polyint(coeffs)
        return npoly.polyval(ts, antideriv) - npoly.polyval(float(t0), antideriv)

    # -- evaluation -----------------------------------------------------

    def _check_domain(self, ts: np.ndarray) -> None:
        lo, hi = self.domain
        if ts.size and (ts.min() < lo or ts.max() > hi):
            raise DomainError(
                f"time outside path domain [{lo}, {hi}]: "
                f"range [{ts.min()}, {ts.max()}] requested"
            )

    def sample(self, ts) -> np.ndarray:
        """Vectorized H(t) for an array of times; returns (len(ts), n, n)."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if not np.all(np.isfinite(ts)):
            raise DomainError("evaluation times must be finite")
        self._check_domain(ts)
        n = self._dim
        if self._kind == "sampled":
            times = self._times
            idx = np.clip(np.searchsorted(times, ts, side="right") - 1, 0, times.size - 2)
            span = times[idx + 1] - times[idx]
            lam = (ts - times[idx]) / span
            return (
                (1.0 - lam)[:, None, None] * self._matrices[idx]
                + lam[:, None, None] * self._matrices[idx + 1]
            )
        out = np.zeros((ts.size, n, n), dtype=np.complex128)
        for matrix, coeffs in self._terms:
            if coeffs is None:
                out += matrix
            else:
                out += npoly.polyval(ts, coeffs)[:, None, None] * matrix
        return out

    def evaluate(self, t: float) -> HermitianMatrix:
        """H(t) as a validated HermitianMatrix."""
        return HermitianMatrix(self.sample([t])[0])

    def generator_samples(self, ts) -> np.ndarray:
        """sign * i * H(t) for an array of times (the stepper input)."""
        return (self._sign * 1j) * self.sample(ts)

    # -- comparison (used by config round-trips) -------------------------

    def __eq__(self, other):
        if not isinstance(other, HamiltonianPath):
            return NotImplemented
        if (self._kind, self._dim, self._sign) != (other._kind, other._dim, other._sign):
            return False
        if self._kind == "sampled":
            return np.array_equal(self._times, other._times) and np.array_equal(
                self._matrices, other._matrices
            )
        if len(self._terms) != len(other._terms):
            return False
        for (m1, c1), (m2, c2) in zip(self._terms, other._terms):
            if not np.array_equal(m1, m2):
                return False
            if (c1 is None) != (c2 is None):
                return False
            if c1 is not None and not np.array_equal(c1, c2):
                return False
        return True

    __hash__ = None

    def __repr__(self):
        return (
            f"HamiltonianPath(kind={self._kind!r}, dim={self._dim}, "
            f"sign={self._sign:+d})"
        )

    # internal: terms / sampled payload accessors for serialization
    @property
    def terms(self):
        """Tuple of (matrix, coeffs-or-None) pairs for polynomial kinds."""
        return self._terms

    @property
    def sample_times(self):
        return self._times

    @property
    def sample_matrices(self):
        return self._matrices
