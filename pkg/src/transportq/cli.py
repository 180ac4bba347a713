"""Command-line front end.

Subcommands:

  run     --config <path> [--csv <path>] [--json <path>]
  verify  --suite <name|all>
  order   --config <path> --steps 16,32,64,128,256 [--csv <path>]

Config files are strict JSON: unknown keys are rejected, every
validation error names the offending key with a dotted/indexed
location, complex entries are numbers or [re, im] pairs.  Exit codes:
0 success, 1 config or validation failure (and failed verify checks),
2 numerical failure during a run.

TRANSPORTQ_THREADS caps the verify worker pool.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .algebra import HermitianMatrix
from .errors import ConfigError, InvariantViolationError, NumericalError, ScenarioError
from .paths import KINDS, HamiltonianPath
from .scenarios import (
    RunReport,
    Scenario,
    builtin_names,
    estimate_convergence_order,
    run_scenario,
    run_suite,
)
from .transport import METHODS

CSV_HEADER = (
    "t,psi_norm,unitarity_defect,schrodinger_residual,"
    "heisenberg_residual,picture_gap,expectation_re,expectation_im"
)


# -- config parsing -------------------------------------------------------

def _fail(location: str, message: str):
    raise ConfigError(location, message)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_keys(obj: dict, location: str, required: tuple, optional: tuple):
    prefix = location + "." if location else ""
    for key in obj:
        if key not in required and key not in optional:
            _fail(f"{prefix}{key}", "unknown key")
    for key in required:
        if key not in obj:
            _fail(location or "<root>", f"missing required key {key!r}")


def _parse_entry(value, location: str) -> complex:
    if _is_number(value):
        return complex(float(value), 0.0)
    if isinstance(value, list) and len(value) == 2 and all(
        _is_number(v) for v in value
    ):
        return complex(float(value[0]), float(value[1]))
    _fail(location, "expected a number or a [re, im] pair")


def _parse_matrix(value, location: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        _fail(location, "expected a non-empty list of rows")
    n = len(value)
    out = np.empty((n, n), dtype=np.complex128)
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != n:
            _fail(f"{location}[{i}]", f"expected a row of {n} entries")
        for j, entry in enumerate(row):
            out[i, j] = _parse_entry(entry, f"{location}[{i}][{j}]")
    return out


def _parse_hermitian(value, location: str) -> np.ndarray:
    m = _parse_matrix(value, location)
    try:
        HermitianMatrix(m)
    except InvariantViolationError as exc:
        _fail(location, str(exc))
    return m


def _parse_vector(value, location: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        _fail(location, "expected a non-empty list of entries")
    out = np.empty(len(value), dtype=np.complex128)
    for i, entry in enumerate(value):
        out[i] = _parse_entry(entry, f"{location}[{i}]")
    return out


def _parse_coeffs(value, location: str) -> list:
    if not isinstance(value, list) or not value:
        _fail(location, "expected a non-empty list of real coefficients")
    for i, c in enumerate(value):
        if not _is_number(c):
            _fail(f"{location}[{i}]", "expected a real number")
    return [float(c) for c in value]


def _parse_path(obj, location: str, sign: int) -> HamiltonianPath:
    if not isinstance(obj, dict):
        _fail(location, "expected an object")
    if "kind" not in obj:
        _fail(location, "missing required key 'kind'")
    kind = obj["kind"]
    if kind not in KINDS:
        _fail(f"{location}.kind", f"unknown kind {kind!r}, expected one of {KINDS}")

    if kind == "constant":
        _check_keys(obj, location, ("kind", "matrix"), ())
        return HamiltonianPath.constant(
            _parse_hermitian(obj["matrix"], f"{location}.matrix"), sign=sign
        )
    if kind == "commuting":
        _check_keys(obj, location, ("kind", "matrix", "coeffs"), ())
        return HamiltonianPath.commuting(
            _parse_hermitian(obj["matrix"], f"{location}.matrix"),
            _parse_coeffs(obj["coeffs"], f"{location}.coeffs"),
            sign=sign,
        )
    if kind == "pauli_sum":
        _check_keys(obj, location, ("kind", "terms"), ())
        terms_val = obj["terms"]
        if not isinstance(terms_val, list) or not terms_val:
            _fail(f"{location}.terms", "expected a non-empty list of terms")
        terms = []
        for i, term in enumerate(terms_val):
            tloc = f"{location}.terms[{i}]"
            if not isinstance(term, dict):
                _fail(tloc, "expected an object with 'matrix' and 'coeffs'")
            _check_keys(term, tloc, ("matrix", "coeffs"), ())
            terms.append((
                _parse_hermitian(term["matrix"], f"{tloc}.matrix"),
                _parse_coeffs(term["coeffs"], f"{tloc}.coeffs"),
            ))
        try:
            return HamiltonianPath.pauli_sum(terms, sign=sign)
        except InvariantViolationError as exc:
            _fail(f"{location}.terms", str(exc))
    # sampled
    _check_keys(obj, location, ("kind", "times", "matrices"), ())
    times_val = obj["times"]
    if not isinstance(times_val, list) or any(
        not _is_number(t) for t in times_val
    ):
        _fail(f"{location}.times", "expected a list of numbers")
    matrices_val = obj["matrices"]
    if not isinstance(matrices_val, list):
        _fail(f"{location}.matrices", "expected a list of matrices")
    matrices = [
        _parse_hermitian(m, f"{location}.matrices[{i}]")
        for i, m in enumerate(matrices_val)
    ]
    try:
        return HamiltonianPath.sampled(
            [float(t) for t in times_val], matrices, sign=sign
        )
    except InvariantViolationError as exc:
        _fail(f"{location}.times", str(exc))


@dataclass(frozen=True)
class ScenarioConfig:
    """A parsed and validated scenario, round-trippable back to JSON."""

    scenario: Scenario

    def to_dict(self) -> dict:
        s = self.scenario
        out = {
            "name": s.name,
            "hamiltonian": _path_to_dict(s.path),
            "sign": s.path.sign,
            "t_final": s.t_final,
            "steps": s.steps,
            "method": s.method,
            "seed": s.seed,
        }
        if s.initial_state is not None:
            out["initial_state"] = [_entry_to_json(z) for z in s.initial_state]
        if s.initial_observable is not None:
            out["initial_observable"] = _matrix_to_json(s.initial_observable.entries)
        return out

    def to_text(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _entry_to_json(z: complex):
    z = complex(z)
    if z.imag == 0.0:
        return z.real
    return [z.real, z.imag]


def _matrix_to_json(m: np.ndarray) -> list:
    return [[_entry_to_json(z) for z in row] for row in m]


def _path_to_dict(path: HamiltonianPath) -> dict:
    if path.kind == "constant":
        return {"kind": "constant", "matrix": _matrix_to_json(path.terms[0][0])}
    if path.kind == "commuting":
        matrix, coeffs = path.terms[0]
        return {
            "kind": "commuting",
            "matrix": _matrix_to_json(matrix),
            "coeffs": list(coeffs),
        }
    if path.kind == "pauli_sum":
        return {
            "kind": "pauli_sum",
            "terms": [
                {"matrix": _matrix_to_json(m), "coeffs": list(c)}
                for m, c in path.terms
            ],
        }
    return {
        "kind": "sampled",
        "times": list(path.sample_times),
        "matrices": [_matrix_to_json(m) for m in path.sample_matrices],
    }


_ROOT_REQUIRED = ("name", "hamiltonian", "t_final")
_ROOT_OPTIONAL = ("sign", "initial_state", "initial_observable", "steps",
                  "method", "seed")


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a JSON scenario config.

    Raises ConfigError with a dotted location for every schema
    violation; unknown keys are rejected anywhere in the document.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        _fail("<root>", "config must be a JSON object")
    _check_keys(doc, "", _ROOT_REQUIRED, _ROOT_OPTIONAL)

    name = doc["name"]
    if not isinstance(name, str) or not name:
        _fail("name", "expected a non-empty string")

    sign = doc.get("sign", 1)
    if sign not in (1, -1) or isinstance(sign, bool):
        _fail("sign", "expected 1 or -1")

    path = _parse_path(doc["hamiltonian"], "hamiltonian", int(sign))

    t_final = doc["t_final"]
    if not _is_number(t_final) or not math.isfinite(float(t_final)) or t_final <= 0:
        _fail("t_final", "expected a positive finite number")

    steps = doc.get("steps", 256)
    if not isinstance(steps, int) or isinstance(steps, bool) or steps < 2:
        _fail("steps", "expected an integer of at least 2")

    method = doc.get("method", "magnus4")
    if method not in METHODS:
        _fail("method", f"unknown method {method!r}, expected one of {METHODS}")

    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not (
        0 <= seed < 2**64
    ):
        _fail("seed", "expected an unsigned 64-bit integer")

    initial_state = None
    if "initial_state" in doc:
        initial_state = _parse_vector(doc["initial_state"], "initial_state")
        if initial_state.size != path.dim:
            _fail(
                "initial_state",
                f"length {initial_state.size} does not match dimension {path.dim}",
            )
        if np.linalg.norm(initial_state) == 0.0:
            _fail("initial_state", "state must be nonzero")

    initial_observable = None
    if "initial_observable" in doc:
        initial_observable = _parse_matrix(
            doc["initial_observable"], "initial_observable"
        )
        if initial_observable.shape[0] != path.dim:
            _fail(
                "initial_observable",
                f"dimension {initial_observable.shape[0]} does not match "
                f"path dimension {path.dim}",
            )

    if initial_state is None and initial_observable is None:
        _fail("<root>", "need initial_state, initial_observable, or both")

    try:
        scenario = Scenario(
            name, path,
            initial_state=initial_state,
            initial_observable=initial_observable,
            t_final=float(t_final), steps=steps, method=method, seed=seed,
        )
    except Exception as exc:
        raise ConfigError("<root>", str(exc)) from exc
    return ScenarioConfig(scenario=scenario)


# -- output writers -------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.16e}"


def report_to_csv(report: RunReport) -> str:
    """Deterministic CSV: 17 significant digits, NaN spelled 'nan'."""
    lines = [CSV_HEADER]
    expectation = report.expectation
    for k in range(report.grid.size):
        lines.append(",".join([
            _fmt(report.grid[k]),
            _fmt(report.psi_norm[k]),
            _fmt(report.unitarity_defect[k]),
            _fmt(report.schrodinger_residual[k]),
            _fmt(report.heisenberg_residual[k]),
            _fmt(report.picture_gap[k]),
            _fmt(expectation[k].real),
            _fmt(expectation[k].imag),
        ]))
    return "\n".join(lines) + "\n"


def report_to_json(report: RunReport) -> str:
    return json.dumps(report.summary(), indent=2, sort_keys=True) + "\n"


# -- subcommands ----------------------------------------------------------

class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="transportq",
        description="Product-integral transport runs and verification suites.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario from a JSON config")
    run_p.add_argument("--config", required=True, help="path to a JSON config")
    run_p.add_argument("--csv", help="write per-grid-point diagnostics here")
    run_p.add_argument("--json", help="write the run summary here")

    ver_p = sub.add_parser("verify", help="run built-in verification suites")
    ver_p.add_argument(
        "--suite", required=True,
        help=f"one of {', '.join(builtin_names())}, or 'all'",
    )

    ord_p = sub.add_parser("order", help="estimate the convergence order")
    ord_p.add_argument("--config", required=True, help="path to a JSON config")
    ord_p.add_argument(
        "--steps", required=True,
        help="comma-separated step counts, e.g. 16,32,64,128,256",
    )
    ord_p.add_argument("--ref-steps", type=int, default=None,
                       help="reference step count (default 100x the largest)")
    ord_p.add_argument("--ref-method", default="magnus4", choices=METHODS,
                       help="reference stepper (default magnus4)")
    ord_p.add_argument("--csv", help="write steps,dt,error rows here")
    return parser


def _read_config(path: str) -> ScenarioConfig:
    try:
        text = open(path, "r", encoding="utf-8").read()
    except OSError as exc:
        raise ConfigError(path, f"cannot read config: {exc.strerror}") from exc
    return parse_config(text)


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _worker_count(n_tasks: int) -> int:
    raw = os.environ.get("TRANSPORTQ_THREADS", "").strip()
    if not raw:
        return max(1, min(4, n_tasks))
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value < 1:
        raise ConfigError("TRANSPORTQ_THREADS", "expected a positive integer")
    return min(value, n_tasks)


def _cmd_run(args) -> int:
    config = _read_config(args.config)
    report = run_scenario(config.scenario)
    summary = report.summary()
    print(
        f"scenario {summary['name']!r}: dim={summary['dim']} "
        f"method={summary['method']} steps={summary['steps']} "
        f"backend={summary['backend']}"
    )
    for key in ("max_unitarity_defect", "max_schrodinger_residual",
                "max_heisenberg_residual", "max_picture_gap"):
        value = summary[key]
        if value is not None:
            print(f"{key.replace('_', ' ')}: {value:.3e}")
    if summary["final_expectation_re"] is not None:
        print(
            "final expectation: "
            f"{summary['final_expectation_re']:+.12f}"
            f"{summary['final_expectation_im']:+.12f}j"
        )
    print(f"wall time: {summary['wall_time_s']:.3f}s")
    if args.csv:
        _write(args.csv, report_to_csv(report))
        print(f"wrote csv to {args.csv}")
    if args.json:
        _write(args.json, report_to_json(report))
        print(f"wrote json to {args.json}")
    return 0


def _cmd_verify(args) -> int:
    names = builtin_names()
    if args.suite != "all":
        if args.suite not in names:
            raise ConfigError(
                "--suite", f"unknown suite {args.suite!r}, expected "
                f"one of {names} or 'all'"
            )
        names = (args.suite,)
    with ThreadPoolExecutor(max_workers=_worker_count(len(names))) as pool:
        results = list(pool.map(run_suite, names))
    all_passed = True
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        all_passed &= result.passed
        worst = result.worst
        print(
            f"{status} {result.name}: worst check {worst.label!r} "
            f"{worst.value:.3e} (tolerance {worst.tol:.1e})"
        )
        if not result.passed:
            for check in result.checks:
                if not check.passed:
                    print(
                        f"  failed: {check.label} {check.value:.6e} "
                        f"> {check.tol:.1e}"
                    )
    return 0 if all_passed else 1


def _cmd_order(args) -> int:
    config = _read_config(args.config)
    try:
        counts = [int(c) for c in args.steps.split(",") if c.strip()]
    except ValueError as exc:
        raise ConfigError("--steps", "expected comma-separated integers") from exc
    study = estimate_convergence_order(
        config.scenario, counts,
        ref_steps=args.ref_steps, ref_method=args.ref_method,
    )
    print(
        f"method={study.method} reference={study.ref_method}"
        f"@{study.ref_steps} steps"
    )
    rows = []
    for steps, dt, error in zip(study.step_counts, study.dts, study.errors):
        print(f"steps={steps} dt={dt:.6e} error={error:.6e}")
        rows.append(f"{steps},{_fmt(dt)},{_fmt(error)}")
    if study.exact:
        print("exact: all errors at the numerical floor, no slope to fit")
    else:
        print(f"slope={study.slope:.4f}")
    if args.csv:
        _write(args.csv, "steps,dt,error\n" + "\n".join(rows) + "\n")
        print(f"wrote csv to {args.csv}")
    return 0


def run_cli(argv=None) -> int:
    """Entry point returning the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_order(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc.__cause__, NumericalError):
            return 2
        return 1
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
