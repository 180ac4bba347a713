from importlib import import_module

import numpy as np
import pytest

transport_mod = import_module("transportq.transport")

from transportq.algebra import (
    SIGMA_X,
    SIGMA_Z,
    ComplexMatrix,
    HermitianMatrix,
    UnitaryMatrix,
    matrix_exp,
)
from transportq.errors import (
    DimensionMismatchError,
    DomainError,
    InvariantViolationError,
    NumericalError,
)
from transportq.paths import HamiltonianPath
from transportq.transport import (
    METHODS,
    Section,
    TransportOperator,
    connection_apply,
    evolve_state,
    heisenberg_residual,
    heisenberg_transport,
    schrodinger_residual,
    step,
    transport,
)

from conftest import hermitian_entries


def benchmark_path():
    return HamiltonianPath.pauli_sum([
        (SIGMA_Z, [1.0]),
        (SIGMA_X, [0.0, 1.0]),
    ])


class TestStep:
    def test_methods_agree_on_constant_path(self):
        p = HamiltonianPath.constant(SIGMA_Z)
        expected = matrix_exp(ComplexMatrix(1j * 0.1 * SIGMA_Z.entries)).entries
        for method in METHODS:
            u = step(p, 0.3, 0.1, method)
            assert isinstance(u, UnitaryMatrix)
            assert np.abs(u.entries - expected).max() < 1e-14

    def test_sign_flips_direction(self):
        plus = step(HamiltonianPath.constant(SIGMA_Z, sign=1), 0.0, 0.2)
        minus = step(HamiltonianPath.constant(SIGMA_Z, sign=-1), 0.0, 0.2)
        assert np.abs(plus.entries @ minus.entries - np.eye(2)).max() < 1e-14

    def test_rejects_bad_dt_and_method(self):
        p = HamiltonianPath.constant(SIGMA_Z)
        with pytest.raises(DomainError):
            step(p, 0.0, 0.0)
        with pytest.raises(DomainError):
            step(p, 0.0, -0.5)
        with pytest.raises(DomainError, match="unknown method"):
            step(p, 0.0, 0.1, "rk4")

    def test_node_placement_differs(self):
        # On H(t) = t sigma_z euler samples the left edge, midpoint the
        # center: exp(0) vs exp(i dt^2/2 sigma_z).
        p = HamiltonianPath.commuting(SIGMA_Z, [0.0, 1.0])
        u_euler = step(p, 0.0, 0.5, "euler")
        assert np.abs(u_euler.entries - np.eye(2)).max() < 1e-15
        u_mid = step(p, 0.0, 0.5, "midpoint")
        expected = np.diag(np.exp([1j * 0.125, -1j * 0.125]))
        assert np.abs(u_mid.entries - expected).max() < 1e-14


class TestTransport:
    def test_grid_and_identity_start(self):
        g = transport(benchmark_path(), 0.0, 1.0, 16)
        assert g.grid.shape == (17,)
        assert g.grid[0] == 0.0 and g.grid[-1] == 1.0
        assert np.array_equal(g.array[0], np.eye(2))
        assert g.dt == 1.0 / 16
        assert g.n_steps == 16
        assert len(g) == 17
        assert g.method == "magnus4"
        assert g.sign == 1

    def test_every_point_unitary(self):
        g = transport(benchmark_path(), 0.0, 1.0, 32)
        for k in range(33):
            assert isinstance(g.unitary(k), UnitaryMatrix)
        assert isinstance(g.final, UnitaryMatrix)
        assert g.unitarity_defects.max() <= 1e-10

    def test_composition(self):
        # Transport over [0,1] equals transport over [0.5,1] composed
        # with transport over [0,0.5] when the grids are shared.
        p = benchmark_path()
        full = transport(p, 0.0, 1.0, 64)
        first = transport(p, 0.0, 0.5, 32)
        second = transport(p, 0.5, 1.0, 32)
        composed = second.array[-1] @ first.array[-1]
        assert np.abs(full.array[-1] - composed).max() < 1e-13

    def test_magnus4_exact_on_constant(self):
        h = hermitian_entries(np.random.Generator(np.random.Philox(5)), 3)
        p = HamiltonianPath.constant(h)
        g = transport(p, 0.0, 2.0, 200)
        w, v = np.linalg.eigh(h)
        exact = (v * np.exp(2j * w)) @ v.conj().T
        assert np.linalg.norm(g.array[-1] - exact, 2) < 1e-12

    def test_midpoint_exact_on_linear_commuting(self):
        p = HamiltonianPath.commuting(SIGMA_Z, [0.0, 1.0])
        g = transport(p, 0.0, 2.0, 128, "midpoint")
        exact = np.diag(np.exp([2j, -2j]))
        assert np.abs(g.array[-1] - exact).max() < 1e-12

    def test_convergence_ratios(self):
        # Halving dt shrinks the terminal error by about 2^order.
        p = benchmark_path()
        ref = transport(p, 0.0, 1.0, 8192, "magnus4").array[-1]

        def err(steps, method):
            g = transport(p, 0.0, 1.0, steps, method)
            return np.linalg.norm(g.array[-1] - ref, 2)

        for method, order in (("euler", 1), ("midpoint", 2), ("magnus4", 4)):
            ratio = err(32, method) / err(64, method)
            assert 2 ** order * 0.8 < ratio < 2 ** order * 1.25, (method, ratio)

    def test_rejects_bad_interval_and_steps(self):
        p = benchmark_path()
        with pytest.raises(DomainError):
            transport(p, 1.0, 1.0, 8)
        with pytest.raises(DomainError):
            transport(p, 1.0, 0.0, 8)
        with pytest.raises(DomainError):
            transport(p, 0.0, 1.0, 0)
        with pytest.raises(DomainError):
            transport(p, 0.0, 1.0, 8, "verlet")

    def test_respects_path_domain(self):
        p = HamiltonianPath.sampled([0.0, 1.0], [np.zeros((2, 2)), np.eye(2)])
        transport(p, 0.0, 1.0, 8)
        with pytest.raises(DomainError):
            transport(p, 0.0, 1.5, 8)

    def test_unitarity_enforced(self, monkeypatch):
        # Force the tolerance impossible to meet; the accumulation must
        # be rejected with a located error.
        monkeypatch.setattr(transport_mod, "UNITARITY_TOL", -1.0)
        with pytest.raises(NumericalError, match="unitarity defect"):
            transport(benchmark_path(), 0.0, 1.0, 4)

    def test_nan_defect_rejected(self, monkeypatch):
        def broken(samples, dt):
            steps = samples.shape[0]
            n = samples.shape[2]
            out = np.full((steps + 1, n, n), np.nan, dtype=np.complex128)
            out[0] = np.eye(n)
            return out

        monkeypatch.setattr(transport_mod._kernels, "transport_accumulate",
                            broken)
        with pytest.raises(NumericalError, match="non-finite"):
            transport(benchmark_path(), 0.0, 1.0, 4)

    def test_readonly_payload(self):
        g = transport(benchmark_path(), 0.0, 1.0, 8)
        with pytest.raises(ValueError):
            g.array[0, 0, 0] = 9.0
        with pytest.raises(ValueError):
            g.grid[0] = 9.0


class TestSection:
    def test_state_section(self):
        grid = np.linspace(0, 1, 5)
        vals = np.ones((5, 3, 1), dtype=complex)
        s = Section(grid, vals)
        assert s.is_state
        assert s.dim == 3
        assert len(s) == 5
        assert np.array_equal(s.value(2), vals[2])

    def test_algebra_section(self):
        s = Section(np.linspace(0, 1, 4), np.zeros((4, 2, 2), dtype=complex))
        assert not s.is_state

    def test_validation(self):
        good = np.zeros((3, 2, 1), dtype=complex)
        with pytest.raises(InvariantViolationError):
            Section([0.0], np.zeros((1, 2, 1)))
        with pytest.raises(InvariantViolationError, match="increasing"):
            Section([0.0, 0.0, 1.0], good)
        with pytest.raises(DimensionMismatchError):
            Section([0.0, 1.0], good)
        with pytest.raises(DimensionMismatchError, match="n x 1 or n x n"):
            Section([0, 1, 2], np.zeros((3, 3, 2)))
        bad = good.copy()
        bad[0, 0, 0] = np.nan
        with pytest.raises(InvariantViolationError, match="finite"):
            Section([0, 1, 2], bad)


class TestStateEvolution:
    def test_conservative_closed_form(self):
        p = HamiltonianPath.constant(SIGMA_Z)
        g = transport(p, 0.0, 1.0, 100)
        sec = evolve_state(g, [0.6, 0.8])
        exact = np.stack([
            np.exp(1j * g.grid) * 0.6,
            np.exp(-1j * g.grid) * 0.8,
        ], axis=1)
        assert np.abs(sec.values[:, :, 0] - exact).max() < 1e-13

    def test_accepts_column_vector(self):
        g = transport(benchmark_path(), 0.0, 1.0, 8)
        sec = evolve_state(g, np.array([[1.0], [0.0]]))
        assert sec.is_state

    def test_dimension_mismatch(self):
        g = transport(benchmark_path(), 0.0, 1.0, 8)
        with pytest.raises(DimensionMismatchError):
            evolve_state(g, [1.0, 0.0, 0.0])

    def test_norm_drift_detected(self):
        # A hand-built non-unitary transport must be caught even though
        # the constructor itself does not re-validate.
        grid = np.linspace(0, 1, 3)
        arr = np.stack([np.eye(2), 1.5 * np.eye(2), np.eye(2)]).astype(complex)
        g = TransportOperator(grid, arr, "euler", 1, np.zeros(3))
        with pytest.raises(NumericalError, match="norm drifted"):
            evolve_state(g, [1.0, 0.0])


class TestHeisenbergTransport:
    def test_conservative_closed_form(self):
        p = HamiltonianPath.constant(SIGMA_Z)
        g = transport(p, 0.0, 1.0, 100)
        sec = heisenberg_transport(g, SIGMA_X)
        t = g.grid
        zero = np.zeros_like(t)
        exact = np.stack([
            np.stack([zero, np.exp(2j * t)], axis=1),
            np.stack([np.exp(-2j * t), zero], axis=1),
        ], axis=1)
        assert np.abs(sec.values - exact).max() < 1e-13

    def test_starts_exactly_at_observable(self):
        g = transport(benchmark_path(), 0.0, 1.0, 8)
        sec = heisenberg_transport(g, SIGMA_X)
        assert np.array_equal(sec.value(0), SIGMA_X.entries)

    def test_dimension_mismatch(self):
        g = transport(benchmark_path(), 0.0, 1.0, 8)
        with pytest.raises(DimensionMismatchError):
            heisenberg_transport(g, ComplexMatrix(np.eye(3)))


class TestConnection:
    def closed_form_state_section(self, steps):
        # psi(t) = (e^{it} 0.6, e^{-it} 0.8) for H = sigma_z, sampled on
        # a uniform grid: the residual is purely finite-difference error.
        grid = np.linspace(0.0, 1.0, steps + 1)
        vals = np.stack([
            np.exp(1j * grid) * 0.6,
            np.exp(-1j * grid) * 0.8,
        ], axis=1)[:, :, None]
        return Section(grid, vals)

    def test_residual_quadratic_in_dt(self):
        p = HamiltonianPath.constant(SIGMA_Z)
        r_coarse = schrodinger_residual(p, self.closed_form_state_section(100))
        r_fine = schrodinger_residual(p, self.closed_form_state_section(200))
        ratio = r_coarse.max() / r_fine.max()
        assert 3.5 <= ratio <= 4.5

    def test_transported_sections_are_nearly_flat(self):
        p = benchmark_path()
        g = transport(p, 0.0, 1.0, 256)
        psi = evolve_state(g, [0.6, 0.8])
        res = schrodinger_residual(p, psi)
        assert res.max() < 1e-4
        alpha = heisenberg_transport(g, SIGMA_X)
        res_a = heisenberg_residual(p, alpha)
        assert res_a.max() < 1e-3

    def test_heisenberg_residual_ratio(self):
        p = HamiltonianPath.constant(SIGMA_Z)

        def alpha_section(steps):
            grid = np.linspace(0.0, 1.0, steps + 1)
            zero = np.zeros_like(grid)
            vals = np.stack([
                np.stack([zero, np.exp(2j * grid)], axis=1),
                np.stack([np.exp(-2j * grid), zero], axis=1),
            ], axis=1)
            return Section(grid, vals)

        r1 = heisenberg_residual(p, alpha_section(100))
        r2 = heisenberg_residual(p, alpha_section(200))
        assert 3.5 <= r1.max() / r2.max() <= 4.5

    def test_connection_apply_shapes_and_types(self):
        p = HamiltonianPath.constant(SIGMA_Z)
        sec = self.closed_form_state_section(10)
        out = connection_apply(p, sec)
        assert out.is_state
        assert out.values.shape == sec.values.shape
        with pytest.raises(DomainError, match="state section"):
            schrodinger_residual(p, heisenberg_transport(
                transport(p, 0.0, 1.0, 8), SIGMA_X))
        with pytest.raises(DomainError, match="algebra section"):
            heisenberg_residual(p, sec)

    def test_needs_three_points_and_uniform_grid(self):
        p = HamiltonianPath.constant(SIGMA_Z)
        two = Section(np.array([0.0, 1.0]), np.ones((2, 2, 1), dtype=complex))
        with pytest.raises(DomainError, match="three points"):
            connection_apply(p, two)
        skewed = Section(np.array([0.0, 0.4, 1.0]),
                         np.ones((3, 2, 1), dtype=complex))
        with pytest.raises(DomainError, match="uniform"):
            connection_apply(p, skewed)

    def test_dimension_mismatch(self):
        p = HamiltonianPath.constant(SIGMA_Z)
        sec = Section(np.linspace(0, 1, 4), np.ones((4, 3, 1), dtype=complex))
        with pytest.raises(DimensionMismatchError):
            connection_apply(p, sec)

    def test_endpoint_stencils_are_second_order(self):
        # Scalar phase on a 1x1 path: endpoint one-sided differences
        # must converge at the same rate as the interior.
        p = HamiltonianPath.constant(np.array([[1.0]]))

        def section(steps):
            grid = np.linspace(0.0, 1.0, steps + 1)
            return Section(grid, np.exp(1j * grid)[:, None, None])

        r100 = schrodinger_residual(p, section(100))
        r200 = schrodinger_residual(p, section(200))
        for idx in (0, -1):
            assert 3.5 <= r100[idx] / r200[idx] <= 4.5
