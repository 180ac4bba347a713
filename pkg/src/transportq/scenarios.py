"""Scenario runs: transport plus diagnostics on a named configuration.

A Scenario bundles a generator path, an optional initial state, an
optional observable, and integration settings.  Running it produces a
RunReport with per-grid-point diagnostics:

  psi_norm             state norm (flat under unitary transport)
  unitarity_defect     || G* G - 1 ||
  schrodinger_residual covariant-derivative norm of the state section
  heisenberg_residual  covariant-derivative norm of the observable flow
  duality_gap          |<psi, a psi> - <y, beta y>| with beta the
                       reverse-transported observable
  superop_gap          observable flow against the vectorized route
                       exp-of-superoperator acting on vec(a)
  picture_gap          duality_gap + superop_gap

Diagnostics that need an absent ingredient are NaN.  Everything is
deterministic for a fixed scenario; randomized ingredients are drawn
from a counter-based Philox generator keyed by the scenario seed at
construction time.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import _kernels
from .algebra import ComplexMatrix, HermitianMatrix, SIGMA_X, SIGMA_Z, as_complex_matrix
from .derivations import vec
from .errors import (
    DimensionMismatchError,
    DomainError,
    InvariantViolationError,
    ScenarioError,
)
from .paths import HamiltonianPath
from .transport import (
    METHODS,
    Section,
    TransportOperator,
    evolve_state,
    heisenberg_transport,
    heisenberg_residual,
    schrodinger_residual,
    transport,
)

# Errors below this are indistinguishable from accumulated roundoff; a
# convergence study whose errors all sit under it reports exactness.
ERROR_FLOOR = 5e-13


def random_hermitian(rng: np.random.Generator, dim: int) -> HermitianMatrix:
    """Standard complex normal entries, symmetrized as (M + M*)/2."""
    m = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    m /= math.sqrt(2.0)
    return HermitianMatrix(0.5 * (m + m.conj().T))


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Normalized random state vector."""
    y = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return y / np.linalg.norm(y)


class Scenario:
    """Validated run configuration.  Equality is structural (used by the
    config round-trip checks)."""

    __slots__ = (
        "name", "path", "initial_state", "initial_observable",
        "t_final", "steps", "method", "seed",
    )

    def __init__(self, name: str, path: HamiltonianPath, *,
                 initial_state=None, initial_observable=None,
                 t_final: float, steps: int = 256,
                 method: str = "magnus4", seed: int = 0):
        if not isinstance(name, str) or not name:
            raise InvariantViolationError("scenario name must be a non-empty string")
        if not isinstance(path, HamiltonianPath):
            raise InvariantViolationError("path must be a HamiltonianPath")
        t_final = float(t_final)
        if not (math.isfinite(t_final) and t_final > 0):
            raise DomainError(f"t_final must be positive and finite, got {t_final}")
        steps = int(steps)
        if steps < 2:
            raise DomainError(f"steps must be at least 2, got {steps}")
        if method not in METHODS:
            raise DomainError(f"unknown method {method!r}, expected one of {METHODS}")
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise DomainError("seed must fit in an unsigned 64-bit integer")
        if initial_state is None and initial_observable is None:
            raise InvariantViolationError(
                "scenario needs an initial state, an observable, or both"
            )
        if initial_state is not None:
            y = np.asarray(initial_state, dtype=np.complex128)
            if y.ndim == 2 and y.shape[1] == 1:
                y = y[:, 0]
            if y.ndim != 1 or y.size != path.dim:
                raise DimensionMismatchError(
                    f"initial state must be a vector of length {path.dim}"
                )
            if not np.all(np.isfinite(y.view(np.float64))):
                raise InvariantViolationError("initial state must be finite")
            if np.linalg.norm(y) == 0.0:
                raise InvariantViolationError("initial state must be nonzero")
            y = y.copy()
            y.setflags(write=False)
            initial_state = y
        if initial_observable is not None:
            initial_observable = as_complex_matrix(initial_observable)
            if initial_observable.dim != path.dim:
                raise DimensionMismatchError(
                    f"observable must have dimension {path.dim}"
                )
        self.name = name
        self.path = path
        self.initial_state = initial_state
        self.initial_observable = initial_observable
        self.t_final = t_final
        self.steps = steps
        self.method = method
        self.seed = seed

    @property
    def dim(self) -> int:
        return self.path.dim

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        if (self.name, self.t_final, self.steps, self.method, self.seed) != (
            other.name, other.t_final, other.steps, other.method, other.seed
        ):
            return False
        if self.path != other.path:
            return False
        if (self.initial_state is None) != (other.initial_state is None):
            return False
        if self.initial_state is not None and not np.array_equal(
            self.initial_state, other.initial_state
        ):
            return False
        if (self.initial_observable is None) != (other.initial_observable is None):
            return False
        if self.initial_observable is not None and not np.array_equal(
            self.initial_observable.entries, other.initial_observable.entries
        ):
            return False
        return True

    __hash__ = None

    def __repr__(self):
        return (
            f"Scenario({self.name!r}, dim={self.dim}, t_final={self.t_final}, "
            f"steps={self.steps}, method={self.method!r})"
        )


@dataclass
class RunReport:
    """Per-grid-point diagnostics of a scenario run.  Missing-ingredient
    columns are NaN throughout."""

    scenario: Scenario
    backend: str
    grid: np.ndarray
    psi_norm: np.ndarray
    unitarity_defect: np.ndarray
    schrodinger_residual: np.ndarray
    heisenberg_residual: np.ndarray
    duality_gap: np.ndarray
    superop_gap: np.ndarray
    picture_gap: np.ndarray
    expectation: np.ndarray
    wall_time_s: float
    transport_op: TransportOperator = field(repr=False, default=None)
    state_section: Optional[Section] = field(repr=False, default=None)
    observable_section: Optional[Section] = field(repr=False, default=None)

    @staticmethod
    def _nanmax(values: np.ndarray) -> Optional[float]:
        if np.all(np.isnan(values)):
            return None
        return float(np.nanmax(values))

    def summary(self) -> dict:
        """JSON-ready run summary; NaN-valued diagnostics become None."""
        final_expect = self.expectation[-1]
        return {
            "name": self.scenario.name,
            "method": self.scenario.method,
            "sign": self.scenario.path.sign,
            "steps": self.scenario.steps,
            "dim": self.scenario.dim,
            "seed": self.scenario.seed,
            "t_final": self.scenario.t_final,
            "backend": self.backend,
            "max_unitarity_defect": self._nanmax(self.unitarity_defect),
            "max_schrodinger_residual": self._nanmax(self.schrodinger_residual),
            "max_heisenberg_residual": self._nanmax(self.heisenberg_residual),
            "max_duality_gap": self._nanmax(self.duality_gap),
            "max_superop_gap": self._nanmax(self.superop_gap),
            "max_picture_gap": self._nanmax(self.picture_gap),
            "final_expectation_re": (
                None if np.isnan(final_expect.real) else float(final_expect.real)
            ),
            "final_expectation_im": (
                None if np.isnan(final_expect.imag) else float(final_expect.imag)
            ),
            "wall_time_s": self.wall_time_s,
        }


def expectation_value(a, psi) -> complex:
    """<psi, a psi> / <psi, psi> for a nonzero state."""
    a = as_complex_matrix(a)
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.ndim == 2 and psi.shape[1] == 1:
        psi = psi[:, 0]
    if psi.ndim != 1 or psi.size != a.dim:
        raise DimensionMismatchError(
            f"state of length {psi.shape} does not match dimension {a.dim}"
        )
    denom = np.vdot(psi, psi).real
    if denom == 0.0:
        raise DomainError("expectation value of the zero state is undefined")
    return complex(np.vdot(psi, a.entries @ psi) / denom)


def _opnorms(stack: np.ndarray) -> np.ndarray:
    return np.linalg.svd(stack, compute_uv=False)[:, 0]


def _superop_samples(path: HamiltonianPath, t0: float, dt: float, steps: int,
                     method: str) -> np.ndarray:
    """Vectorized generator samples sign * i * (1 (x) H - H^T (x) 1) at
    the same stepper nodes the transport uses."""
    from .transport import _generator_stack

    a_nodes = _generator_stack(path, t0, dt, steps, method)
    h_nodes = a_nodes / (path.sign * 1j)
    m = h_nodes.shape[1]
    n = path.dim
    eye = np.eye(n)
    out = np.empty((steps, m, n * n, n * n), dtype=np.complex128)
    for k in range(steps):
        for j in range(m):
            h = h_nodes[k, j]
            out[k, j] = (path.sign * 1j) * (np.kron(eye, h) - np.kron(h.T, eye))
    return out


def _superop_evolved_vecs(scenario: Scenario, grid: np.ndarray,
                          a_entries: np.ndarray) -> np.ndarray:
    """vec(alpha(t_k)) through the superoperator route, shaped (K, n*n).

    Commuting families use the closed form exp(F(t) S0) evaluated by one
    eigendecomposition; otherwise the superoperator equation is stepped
    with the scenario's own method on the same grid.
    """
    path = scenario.path
    n = path.dim
    vec_a = vec(ComplexMatrix(a_entries))
    if path.is_commuting_family:
        h0 = path.base_generator.entries
        eye = np.eye(n)
        b = np.kron(eye, h0) - np.kron(h0.T, eye)
        b = 0.5 * (b + b.conj().T)
        w, v = np.linalg.eigh(b)
        fs = path.coefficient_integrals(grid[0], grid)
        phases = np.exp(1j * path.sign * np.outer(fs, w))
        return (phases * (v.conj().T @ vec_a)) @ v.T

    dt = (grid[-1] - grid[0]) / (grid.size - 1)
    samples = _superop_samples(path, grid[0], dt, grid.size - 1, scenario.method)
    e_stack = _kernels.transport_accumulate(samples, dt)
    return e_stack @ vec_a


def _unvec_stack(vecs: np.ndarray, n: int) -> np.ndarray:
    """Column-stacking inverse for a (K, n*n) stack: (K, n, n)."""
    return vecs.reshape(-1, n, n).transpose(0, 2, 1)


def run_scenario(scenario: Scenario) -> RunReport:
    """Run the transport and every applicable diagnostic.

    Failures are wrapped in ScenarioError naming the stage; the original
    exception rides along as the cause.
    """
    started = time.perf_counter()

    def stage(label, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except Exception as exc:
            raise ScenarioError(f"stage {label!r}: {exc}") from exc

    g = stage("transport", transport, scenario.path, 0.0, scenario.t_final,
              scenario.steps, scenario.method)
    grid = g.grid
    npts = grid.size
    nan = np.full(npts, np.nan)

    psi_norm = nan.copy()
    schro = nan.copy()
    heis = nan.copy()
    duality = nan.copy()
    superop = nan.copy()
    expectation = np.full(npts, np.nan + 1j * np.nan)

    psi_section = None
    if scenario.initial_state is not None:
        psi_section = stage("state evolution", evolve_state, g, scenario.initial_state)
        psi_norm = np.linalg.norm(psi_section.values[:, :, 0], axis=1)
        schro = stage("schrodinger residual", schrodinger_residual,
                      scenario.path, psi_section)

    alpha_section = None
    if scenario.initial_observable is not None:
        alpha_section = stage("observable evolution", heisenberg_transport,
                              g, scenario.initial_observable)
        heis = stage("heisenberg residual", heisenberg_residual,
                     scenario.path, alpha_section)
        evolved = stage("superoperator cross-check", _superop_evolved_vecs,
                        scenario, grid, scenario.initial_observable.entries)
        superop = _opnorms(
            alpha_section.values - _unvec_stack(evolved, scenario.dim)
        )

    if scenario.initial_state is not None and scenario.initial_observable is not None:
        y = scenario.initial_state
        a = scenario.initial_observable.entries
        psis = psi_section.values[:, :, 0]
        forward = np.einsum("ki,ij,kj->k", psis.conj(), a, psis)
        stack = g.array
        betas = np.matmul(np.matmul(stack.conj().transpose(0, 2, 1), a), stack)
        reverse = np.einsum("i,kij,j->k", y.conj(), betas, y)
        duality = np.abs(forward - reverse)
        norms_sq = (psi_norm ** 2)
        expectation = forward / norms_sq

    picture = duality + superop if (
        scenario.initial_state is not None
        and scenario.initial_observable is not None
    ) else nan.copy()

    wall = time.perf_counter() - started
    for arr in (psi_norm, schro, heis, duality, superop, picture, expectation):
        arr.setflags(write=False)
    return RunReport(
        scenario=scenario,
        backend=_kernels.BACKEND,
        grid=grid,
        psi_norm=psi_norm,
        unitarity_defect=g.unitarity_defects,
        schrodinger_residual=schro,
        heisenberg_residual=heis,
        duality_gap=duality,
        superop_gap=superop,
        picture_gap=picture,
        expectation=expectation,
        wall_time_s=wall,
        transport_op=g,
        state_section=psi_section,
        observable_section=alpha_section,
    )


def check_picture_equivalence(scenario: Scenario) -> float:
    """Max duality gap plus max superoperator gap over the grid.

    Requires both an initial state and an observable; the value bounds
    how far the two pictures of the same run have drifted apart.
    """
    if scenario.initial_state is None or scenario.initial_observable is None:
        raise DomainError(
            "picture equivalence needs both an initial state and an observable"
        )
    report = run_scenario(scenario)
    return float(np.max(report.duality_gap) + np.max(report.superop_gap))


@dataclass(frozen=True)
class ConvergenceStudy:
    """Result of an order estimate.  When every error sits at the
    numerical floor the study reports exactness and no slope."""

    method: str
    step_counts: tuple
    dts: tuple
    errors: tuple
    slope: Optional[float]
    exact: bool
    ref_steps: int
    ref_method: str


def estimate_convergence_order(scenario: Scenario, step_counts, *,
                               ref_steps: Optional[int] = None,
                               ref_method: str = "magnus4") -> ConvergenceStudy:
    """Least-squares slope of log(error) against log(dt).

    The error at each step count is the operator norm of the difference
    between the terminal transport and a fine-grid reference transport
    (ref_method at ref_steps, default 100x the largest count).  Errors
    at or below ERROR_FLOOR are excluded from the fit; if every error
    sits there the study reports exactness instead of a slope.
    """
    counts = [int(c) for c in step_counts]
    if len(counts) < 2:
        raise DomainError("order estimate needs at least two step counts")
    if any(c < 1 for c in counts) or any(
        b <= a for a, b in zip(counts, counts[1:])
    ):
        raise DomainError("step counts must be strictly increasing and positive")
    if ref_method not in METHODS:
        raise DomainError(f"unknown reference method {ref_method!r}")
    if ref_steps is None:
        ref_steps = 100 * max(counts)
    ref_steps = int(ref_steps)
    if ref_steps <= max(counts):
        raise DomainError("reference must use more steps than every study count")

    ref = transport(scenario.path, 0.0, scenario.t_final, ref_steps, ref_method)
    ref_final = ref.array[-1]
    errors = []
    dts = []
    for c in counts:
        g = transport(scenario.path, 0.0, scenario.t_final, c, scenario.method)
        errors.append(float(np.linalg.norm(g.array[-1] - ref_final, 2)))
        dts.append(scenario.t_final / c)
    errors_arr = np.array(errors)
    usable = errors_arr > ERROR_FLOOR
    if usable.sum() < 2:
        return ConvergenceStudy(
            method=scenario.method, step_counts=tuple(counts), dts=tuple(dts),
            errors=tuple(errors), slope=None, exact=True,
            ref_steps=ref_steps, ref_method=ref_method,
        )
    coeffs = npoly.polyfit(
        np.log(np.array(dts)[usable]), np.log(errors_arr[usable]), 1
    )
    return ConvergenceStudy(
        method=scenario.method, step_counts=tuple(counts), dts=tuple(dts),
        errors=tuple(errors), slope=float(coeffs[1]), exact=False,
        ref_steps=ref_steps, ref_method=ref_method,
    )


# -- built-in scenarios and their oracles --------------------------------

def builtin_names() -> tuple:
    return ("conservative", "commuting-family", "noncommuting-benchmark",
            "random-hermitian")


def builtin_scenario(name: str, seed: int = 0) -> Scenario:
    """Construct one of the named built-in scenarios."""
    y = np.array([0.6, 0.8], dtype=np.complex128)
    if name == "conservative":
        return Scenario(
            "conservative", HamiltonianPath.constant(SIGMA_Z),
            initial_state=y, initial_observable=SIGMA_X,
            t_final=10.0, steps=10_000, method="magnus4", seed=seed,
        )
    if name == "commuting-family":
        return Scenario(
            "commuting-family",
            HamiltonianPath.commuting(SIGMA_Z, [0.0, 1.0]),
            initial_state=y, initial_observable=SIGMA_X,
            t_final=2.0, steps=256, method="midpoint", seed=seed,
        )
    if name == "noncommuting-benchmark":
        return Scenario(
            "noncommuting-benchmark",
            HamiltonianPath.pauli_sum([(SIGMA_Z, [1.0]), (SIGMA_X, [0.0, 1.0])]),
            initial_state=y, initial_observable=SIGMA_X,
            t_final=1.0, steps=256, method="magnus4", seed=seed,
        )
    if name == "random-hermitian":
        rng = np.random.Generator(np.random.Philox(seed))
        dim = 4
        h = random_hermitian(rng, dim)
        state = random_state(rng, dim)
        obs = random_hermitian(rng, dim)
        return Scenario(
            "random-hermitian", HamiltonianPath.constant(h),
            initial_state=state, initial_observable=obs,
            t_final=1.0, steps=256, method="magnus4", seed=seed,
        )
    raise DomainError(
        f"unknown scenario {name!r}, expected one of {builtin_names()}"
    )


@dataclass(frozen=True)
class OracleCheck:
    label: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tol)


@dataclass(frozen=True)
class OracleResult:
    name: str
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def worst(self) -> OracleCheck:
        return max(self.checks, key=lambda c: c.value / c.tol)


def _closed_form_commuting_state(scenario: Scenario) -> np.ndarray:
    """exp(sign * i * F(t) * H0) y by eigendecomposition, per grid point."""
    path = scenario.path
    grid = np.linspace(0.0, scenario.t_final, scenario.steps + 1)
    w, v = np.linalg.eigh(path.base_generator.entries)
    fs = path.coefficient_integrals(0.0, grid)
    phases = np.exp(1j * path.sign * np.outer(fs, w))
    coeffs = v.conj().T @ scenario.initial_state
    return (phases * coeffs) @ v.T


def _check_unitarity_and_duality(report: RunReport, checks: list) -> None:
    checks.append(OracleCheck(
        "unitarity defect", float(report.unitarity_defect.max()), 1e-10))
    checks.append(OracleCheck(
        "mean-value duality gap", float(np.max(report.duality_gap)), 1e-10))


def run_suite(name: str) -> OracleResult:
    """Run one built-in scenario against its oracle checks."""
    scenario = builtin_scenario(name)
    report = run_scenario(scenario)
    grid = report.grid
    checks = []

    if name == "conservative":
        psi_exact = np.stack([
            np.exp(1j * grid) * scenario.initial_state[0],
            np.exp(-1j * grid) * scenario.initial_state[1],
        ], axis=1)
        state_err = np.abs(report.state_section.values[:, :, 0] - psi_exact)
        checks.append(OracleCheck(
            "state vs closed form", float(np.linalg.norm(state_err, axis=1).max()),
            1e-10))
        zero = np.zeros_like(grid)
        alpha_exact = np.stack([
            np.stack([zero, np.exp(2j * grid)], axis=1),
            np.stack([np.exp(-2j * grid), zero], axis=1),
        ], axis=1)
        obs_err = _opnorms(report.observable_section.values - alpha_exact)
        checks.append(OracleCheck(
            "observable vs closed form", float(obs_err.max()), 1e-10))
        expect_exact = 0.96 * np.cos(2.0 * grid)
        checks.append(OracleCheck(
            "expectation vs closed form",
            float(np.abs(report.expectation - expect_exact).max()), 1e-10))
        _check_unitarity_and_duality(report, checks)
        checks.append(OracleCheck(
            "superoperator gap", float(np.max(report.superop_gap)), 1e-9))

    elif name == "commuting-family":
        psi_exact = _closed_form_commuting_state(scenario)
        err = np.linalg.norm(
            report.state_section.values[:, :, 0] - psi_exact, axis=1)
        checks.append(OracleCheck(
            "state vs closed form", float(err.max()), 1e-10))
        _check_unitarity_and_duality(report, checks)
        checks.append(OracleCheck(
            "superoperator gap", float(np.max(report.superop_gap)), 1e-9))

    elif name == "noncommuting-benchmark":
        _check_unitarity_and_duality(report, checks)
        checks.append(OracleCheck(
            "superoperator cross-check", float(np.max(report.superop_gap)), 1e-8))
        fine = transport(scenario.path, 0.0, scenario.t_final,
                         16 * scenario.steps, "magnus4")
        drift = float(np.linalg.norm(
            report.transport_op.array[-1] - fine.array[-1], 2))
        checks.append(OracleCheck("terminal refinement drift", drift, 1e-8))

    elif name == "random-hermitian":
        psi_exact = _closed_form_commuting_state(scenario)
        err = np.linalg.norm(
            report.state_section.values[:, :, 0] - psi_exact, axis=1)
        checks.append(OracleCheck(
            "state vs eigendecomposition", float(err.max()), 1e-9))
        _check_unitarity_and_duality(report, checks)
        checks.append(OracleCheck(
            "superoperator gap", float(np.max(report.superop_gap)), 1e-8))

    else:
        raise DomainError(
            f"unknown suite {name!r}, expected one of {builtin_names()}"
        )

    return OracleResult(name=name, checks=tuple(checks))
