"""Acceptance gate: every criterion prints one PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines for
passing criteria too; without -s pytest shows them only on failure.
"""

import numpy as np

from transportq import (
    HamiltonianPath,
    InnerDerivation,
    METHODS,
    Scenario,
    SIGMA_X,
    SIGMA_Z,
    Section,
    builtin_scenario,
    check_group_vs_superoperator,
    check_leibniz,
    check_star_compatibility,
    derivation_superoperator,
    estimate_convergence_order,
    heisenberg_residual,
    operator_norm,
    random_hermitian,
    run_scenario,
    schrodinger_residual,
    transport,
)
from transportq.cli import ScenarioConfig, run_cli


def _criterion(num: int, label: str, passed: bool, detail: str = "") -> bool:
    status = "PASS" if passed else "FAIL"
    suffix = f"  [{detail}]" if detail else ""
    print(f"criterion {num} ({label}): {status}{suffix}")
    return passed


def _rng(salt: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(20260816 + salt))


def _random_matrix(rng, dim):
    return rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))


def benchmark_path():
    return HamiltonianPath.pauli_sum([(SIGMA_Z, [1.0]), (SIGMA_X, [0.0, 1.0])])


def test_criterion_1_conservative_closed_forms():
    scenario = builtin_scenario("conservative")
    report = run_scenario(scenario)
    grid = report.grid

    psi_exact = np.stack([
        np.exp(1j * grid) * scenario.initial_state[0],
        np.exp(-1j * grid) * scenario.initial_state[1],
    ], axis=1)
    state_err = float(np.linalg.norm(
        report.state_section.values[:, :, 0] - psi_exact, axis=1).max())

    zero = np.zeros_like(grid)
    alpha_exact = np.stack([
        np.stack([zero, np.exp(2j * grid)], axis=1),
        np.stack([np.exp(-2j * grid), zero], axis=1),
    ], axis=1)
    obs_err = float(np.linalg.svd(
        report.observable_section.values - alpha_exact,
        compute_uv=False)[:, 0].max())

    expect_err = float(np.abs(
        report.expectation - 0.96 * np.cos(2.0 * grid)).max())

    worst = max(state_err, obs_err, expect_err)
    ok = worst <= 1e-10
    assert _criterion(
        1, "conservative closed forms", ok,
        f"state {state_err:.2e}, observable {obs_err:.2e}, "
        f"expectation {expect_err:.2e}, tol 1e-10",
    )


def test_criterion_2_group_vs_superoperator():
    rng = _rng(2)
    worst = 0.0
    for _ in range(100):
        dim = int(rng.integers(2, 7))
        h = random_hermitian(rng, dim)
        a = _random_matrix(rng, dim)
        r = float(rng.uniform(-2.0, 2.0))
        worst = max(worst, check_group_vs_superoperator(
            InnerDerivation(h), r, a))
    ok = worst <= 1e-9
    assert _criterion(
        2, "group vs superoperator oracle", ok,
        f"worst defect {worst:.2e} over 100 triples, tol 1e-9",
    )


def test_criterion_3_derivation_axioms():
    rng = _rng(3)
    worst_axiom = 0.0
    bound_ok = True
    for _ in range(1000):
        dim = int(rng.integers(2, 9))
        h = random_hermitian(rng, dim)
        d = InnerDerivation(h)
        a = _random_matrix(rng, dim)
        b = _random_matrix(rng, dim)
        worst_axiom = max(
            worst_axiom,
            check_leibniz(d, a, b),
            check_star_compatibility(d, a),
        )
        norm = derivation_superoperator(d).norm()
        bound_ok &= norm <= 2.0 * operator_norm(h) + 1e-9

    sz_norm = derivation_superoperator(InnerDerivation(SIGMA_Z)).norm()
    equality_gap = abs(sz_norm - 2.0 * operator_norm(SIGMA_Z))

    ok = worst_axiom <= 1e-10 and bound_ok and equality_gap <= 1e-9
    assert _criterion(
        3, "derivation axioms", ok,
        f"worst axiom defect {worst_axiom:.2e} over 1000 triples "
        f"(tol 1e-10), norm bound {'held' if bound_ok else 'VIOLATED'}, "
        f"equality gap {equality_gap:.2e} (tol 1e-9)",
    )


def test_criterion_4_unitarity_all_methods():
    path = benchmark_path()
    worst = {}
    for method in METHODS:
        g = transport(path, 0.0, 1.0, 256, method)
        worst[method] = float(g.unitarity_defects.max())
    ok = all(v <= 1e-10 for v in worst.values())
    detail = ", ".join(f"{m} {v:.2e}" for m, v in worst.items())
    assert _criterion(
        4, "unitarity of transport", ok, detail + ", tol 1e-10")


def test_criterion_5_convergence_orders():
    counts = (16, 32, 64, 128, 256)
    bands = {"euler": (1.0, 0.2), "midpoint": (2.0, 0.2), "magnus4": (4.0, 0.3)}
    slopes = {}
    ok = True
    for method, (target, width) in bands.items():
        scenario = Scenario(
            "benchmark", benchmark_path(),
            initial_state=[0.6, 0.8], t_final=1.0, steps=256, method=method,
        )
        study = estimate_convergence_order(
            scenario, counts, ref_steps=100_000, ref_method="magnus4")
        slopes[method] = study.slope
        ok &= study.slope is not None and abs(study.slope - target) <= width
    detail = ", ".join(
        f"{m} {s:.3f} (want {b[0]}±{b[1]})"
        for (m, b), s in zip(bands.items(), slopes.values())
    )
    assert _criterion(5, "convergence orders", ok, detail)


def _closed_form_sections(steps):
    grid = np.linspace(0.0, 1.0, steps + 1)
    psi = np.stack([
        0.6 * np.exp(1j * grid), 0.8 * np.exp(-1j * grid)
    ], axis=1)[:, :, None]
    zero = np.zeros_like(grid)
    alpha = np.stack([
        np.stack([zero, np.exp(2j * grid)], axis=1),
        np.stack([np.exp(-2j * grid), zero], axis=1),
    ], axis=1)
    return Section(grid, psi), Section(grid, alpha)


def test_criterion_6_integral_section_residuals():
    path = HamiltonianPath.constant(SIGMA_Z)
    ratios = {}
    for label, residual, pick in (
        ("state", schrodinger_residual, 0),
        ("observable", heisenberg_residual, 1),
    ):
        coarse = float(residual(path, _closed_form_sections(128)[pick]).max())
        fine = float(residual(path, _closed_form_sections(256)[pick]).max())
        ratios[label] = coarse / fine
    ok = all(3.5 <= r <= 4.5 for r in ratios.values())
    detail = ", ".join(f"{k} ratio {v:.3f}" for k, v in ratios.items())
    assert _criterion(
        6, "integral-section residuals", ok, detail + ", want [3.5, 4.5]")


def test_criterion_7_mean_value_duality():
    report = run_scenario(builtin_scenario("noncommuting-benchmark"))
    worst = float(np.max(report.duality_gap))
    ok = worst <= 1e-10
    assert _criterion(
        7, "mean-value duality", ok, f"max gap {worst:.2e}, tol 1e-10")


def test_criterion_8_cli_round_trip_and_determinism(tmp_path, capsys):
    verify_code = run_cli(["verify", "--suite", "all"])

    config_path = tmp_path / "benchmark.json"
    config_path.write_text(
        ScenarioConfig(builtin_scenario("noncommuting-benchmark")).to_text(),
        encoding="utf-8",
    )
    outputs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        code = run_cli([
            "run", "--config", str(config_path), "--csv", str(out)])
        outputs.append((code, out.read_bytes()))
    capsys.readouterr()

    runs_ok = all(code == 0 for code, _ in outputs)
    identical = outputs[0][1] == outputs[1][1]
    ok = verify_code == 0 and runs_ok and identical
    assert _criterion(
        8, "cli round-trip and determinism", ok,
        f"verify exit {verify_code}, csv identical {identical}",
    )
