"""Product-integral transport along a generator path.

The transport operator on [t0, t1] is the ordered product of one-step
exponentials of the generator A(t) = sign * i * H(t).  Three steppers
are provided:

  euler      U_k = exp(A(t_k) dt)                          order 1
  midpoint   U_k = exp(A(t_k + dt/2) dt)                   order 2
  magnus4    U_k = exp(Omega_k) with the two-point Gauss
             nodes and the leading commutator correction   order 4

Every step exponentiates a skew-Hermitian matrix, so each factor is
unitary and the accumulated transport must stay unitary; the defect
is checked against UNITARITY_TOL after accumulation.

Sections (grid-indexed state or algebra-element values) live here too,
together with the discrete connection: covariant derivative along the
grid, and the Schrodinger / Heisenberg residuals built from it.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .algebra import UNITARITY_TOL, UnitaryMatrix, as_complex_matrix
from .errors import (
    DimensionMismatchError,
    DomainError,
    InvariantViolationError,
    NumericalError,
)
from .paths import HamiltonianPath

METHODS = ("euler", "midpoint", "magnus4")

# Two-point Gauss-Legendre nodes on [0, 1].
_GL_LO = 0.5 - math.sqrt(3.0) / 6.0
_GL_HI = 0.5 + math.sqrt(3.0) / 6.0


def _require_method(method: str) -> None:
    if method not in METHODS:
        raise DomainError(f"unknown method {method!r}, expected one of {METHODS}")


def _generator_stack(path: HamiltonianPath, t0: float, dt: float, steps: int,
                     method: str) -> np.ndarray:
    """Generator samples at the stepper nodes, shaped (steps, m, n, n)
    with m = 1 for euler/midpoint and m = 2 for magnus4."""
    lefts = t0 + dt * np.arange(steps)
    if method == "euler":
        nodes = lefts
        m = 1
    elif method == "midpoint":
        nodes = lefts + 0.5 * dt
        m = 1
    else:
        nodes = np.stack([lefts + _GL_LO * dt, lefts + _GL_HI * dt], axis=1).ravel()
        m = 2
    samples = path.generator_samples(nodes)
    n = path.dim
    return np.ascontiguousarray(samples.reshape(steps, m, n, n))


def _unitarity_defects(stack: np.ndarray) -> np.ndarray:
    """Operator-norm defect || G* G - I || for each matrix in the stack."""
    n = stack.shape[-1]
    gram = np.matmul(stack.conj().transpose(0, 2, 1), stack)
    gram -= np.eye(n)
    return np.linalg.svd(gram, compute_uv=False)[:, 0]


def step(path: HamiltonianPath, t: float, dt: float, method: str = "magnus4"
         ) -> UnitaryMatrix:
    """Single-step transport factor on [t, t + dt]."""
    _require_method(method)
    dt = float(dt)
    if not (math.isfinite(dt) and dt > 0):
        raise DomainError(f"step size must be positive and finite, got {dt}")
    samples = _generator_stack(path, float(t), dt, 1, method)
    u = _kernels.transport_accumulate(samples, dt)[1]
    return UnitaryMatrix(u)


class TransportOperator:
    """Accumulated transport G(t_k) on a uniform grid, G(t_0) = 1."""

    __slots__ = ("_grid", "_array", "_method", "_sign", "_defects")

    def __init__(self, grid: np.ndarray, array: np.ndarray, method: str,
                 sign: int, defects: np.ndarray):
        self._grid = grid
        self._array = array
        self._method = method
        self._sign = sign
        self._defects = defects

    @property
    def grid(self) -> np.ndarray:
        return self._grid

    @property
    def array(self) -> np.ndarray:
        """All transports, shaped (steps + 1, n, n)."""
        return self._array

    @property
    def method(self) -> str:
        return self._method

    @property
    def sign(self) -> int:
        return self._sign

    @property
    def unitarity_defects(self) -> np.ndarray:
        return self._defects

    @property
    def dim(self) -> int:
        return self._array.shape[-1]

    @property
    def n_steps(self) -> int:
        return self._grid.size - 1

    @property
    def dt(self) -> float:
        return float(self._grid[1] - self._grid[0])

    def unitary(self, k: int) -> UnitaryMatrix:
        """G(t_k) as a validated UnitaryMatrix."""
        return UnitaryMatrix(self._array[k])

    @property
    def final(self) -> UnitaryMatrix:
        return UnitaryMatrix(self._array[-1])

    def __len__(self) -> int:
        return self._grid.size

    def __repr__(self):
        return (
            f"TransportOperator(dim={self.dim}, steps={self.n_steps}, "
            f"method={self._method!r}, max_defect={self._defects.max():.3e})"
        )


def transport(path: HamiltonianPath, t0: float, t1: float, steps: int,
              method: str = "magnus4") -> TransportOperator:
    """Transport along the path over [t0, t1] with a uniform grid."""
    _require_method(method)
    t0 = float(t0)
    t1 = float(t1)
    if not (math.isfinite(t0) and math.isfinite(t1) and t1 > t0):
        raise DomainError(f"need finite t1 > t0, got [{t0}, {t1}]")
    steps = int(steps)
    if steps < 1:
        raise DomainError(f"need at least one step, got {steps}")
    dt = (t1 - t0) / steps
    samples = _generator_stack(path, t0, dt, steps, method)
    array = _kernels.transport_accumulate(samples, dt)
    grid = np.linspace(t0, t1, steps + 1)
    if not np.all(np.isfinite(array.view(np.float64))):
        raise NumericalError(
            f"transport produced non-finite entries (method {method!r}, "
            f"{steps} steps)"
        )
    defects = _unitarity_defects(array)
    # NaN-safe: a comparison with NaN is False, so "not all(<=)" trips.
    if not np.all(defects <= UNITARITY_TOL):
        worst = int(np.nanargmax(defects)) if np.all(np.isfinite(defects)) else -1
        raise NumericalError(
            f"unitarity defect {defects.max():.3e} exceeds {UNITARITY_TOL:.1e} "
            f"at grid index {worst} (method {method!r}, {steps} steps)"
        )
    grid.setflags(write=False)
    array.setflags(write=False)
    defects.setflags(write=False)
    return TransportOperator(grid, array, method, path.sign, defects)


class Section:
    """Values along the grid: states (n x 1) or algebra elements (n x n)."""

    __slots__ = ("_grid", "_values")

    def __init__(self, grid, values):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=np.complex128)
        if grid.ndim != 1 or grid.size < 2:
            raise InvariantViolationError("section grid needs at least two points")
        if not np.all(np.diff(grid) > 0):
            raise InvariantViolationError("section grid must be strictly increasing")
        if values.ndim != 3 or values.shape[0] != grid.size:
            raise DimensionMismatchError(
                f"values shaped {values.shape} do not match {grid.size} grid points"
            )
        n, m = values.shape[1], values.shape[2]
        if m not in (1, n):
            raise DimensionMismatchError(
                f"section values must be n x 1 or n x n, got {n} x {m}"
            )
        if not np.all(np.isfinite(values.view(np.float64))):
            raise InvariantViolationError("section values must be finite")
        grid = grid.copy()
        values = values.copy()
        grid.setflags(write=False)
        values.setflags(write=False)
        self._grid = grid
        self._values = values

    @property
    def grid(self) -> np.ndarray:
        return self._grid

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def dim(self) -> int:
        return self._values.shape[1]

    @property
    def is_state(self) -> bool:
        return self._values.shape[2] == 1

    def value(self, k: int) -> np.ndarray:
        return self._values[k]

    def __len__(self) -> int:
        return self._grid.size

    def __repr__(self):
        shape = "state" if self.is_state else "algebra"
        return f"Section({shape}, dim={self.dim}, points={len(self)})"


def _as_state(y, dim: int) -> np.ndarray:
    arr = np.asarray(y, dtype=np.complex128)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise DimensionMismatchError(f"state must be a vector, got shape {arr.shape}")
    if arr.size != dim:
        raise DimensionMismatchError(
            f"state has dimension {arr.size}, transport has {dim}"
        )
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise InvariantViolationError("state entries must be finite")
    return arr


def evolve_state(g: TransportOperator, y) -> Section:
    """psi(t_k) = G(t_k) y; norms are checked against ||y||."""
    y = _as_state(y, g.dim)
    psis = g.array @ y
    norm0 = float(np.linalg.norm(y))
    norms = np.linalg.norm(psis, axis=1)
    if not np.all(np.abs(norms - norm0) <= 1e-9 * max(norm0, 1.0)):
        raise NumericalError(
            f"state norm drifted by {np.abs(norms - norm0).max():.3e}"
        )
    return Section(g.grid, psis[:, :, None])


def heisenberg_transport(g: TransportOperator, a) -> Section:
    """alpha(t_k) = G(t_k) a G(t_k)*, the dual observable flow."""
    a = as_complex_matrix(a)
    if a.dim != g.dim:
        raise DimensionMismatchError(
            f"observable has dimension {a.dim}, transport has {g.dim}"
        )
    stack = g.array
    alphas = np.matmul(np.matmul(stack, a.entries), stack.conj().transpose(0, 2, 1))
    norm0 = float(np.linalg.norm(a.entries, 2))
    norms = np.linalg.svd(alphas, compute_uv=False)[:, 0]
    if not np.all(np.abs(norms - norm0) <= 1e-9 * max(norm0, 1.0)):
        raise NumericalError(
            f"observable norm drifted by {np.abs(norms - norm0).max():.3e}"
        )
    return Section(g.grid, alphas)


def _uniform_dt(grid: np.ndarray) -> float:
    diffs = np.diff(grid)
    dt = float(diffs[0])
    if not np.allclose(diffs, dt, rtol=1e-9, atol=0.0):
        raise DomainError("connection derivative needs a uniform grid")
    return dt


def _grid_derivative(values: np.ndarray, dt: float) -> np.ndarray:
    """Second-order finite differences: central inside, one-sided at the
    ends.  Needs at least three grid points."""
    if values.shape[0] < 3:
        raise DomainError("grid derivative needs at least three points")
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2.0 * dt)
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dt)
    out[-1] = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * dt)
    return out


def connection_apply(path: HamiltonianPath, section: Section) -> Section:
    """Discrete covariant derivative along the path.

    For a state section this is d/dt psi - sign * i * H(t) psi; for an
    algebra section d/dt alpha - sign * i * [H(t), alpha].  Transported
    sections are flat, so the result measures integrator error.
    """
    if section.dim != path.dim:
        raise DimensionMismatchError(
            f"section dimension {section.dim} does not match path {path.dim}"
        )
    dt = _uniform_dt(section.grid)
    deriv = _grid_derivative(section.values, dt)
    hs = path.sample(section.grid)
    coeff = path.sign * 1j
    if section.is_state:
        action = coeff * np.matmul(hs, section.values)
    else:
        vals = section.values
        action = coeff * (np.matmul(hs, vals) - np.matmul(vals, hs))
    return Section(section.grid, deriv - action)


def schrodinger_residual(path: HamiltonianPath, section: Section) -> np.ndarray:
    """Per-point vector norm of the covariant derivative of a state
    section."""
    if not section.is_state:
        raise DomainError("expected a state section (n x 1 values)")
    nabla = connection_apply(path, section)
    return np.linalg.norm(nabla.values[:, :, 0], axis=1)


def heisenberg_residual(path: HamiltonianPath, section: Section) -> np.ndarray:
    """Per-point operator norm of the covariant derivative of an algebra
    section."""
    if section.is_state:
        raise DomainError("expected an algebra section (n x n values)")
    nabla = connection_apply(path, section)
    return np.linalg.svd(nabla.values, compute_uv=False)[:, 0]
