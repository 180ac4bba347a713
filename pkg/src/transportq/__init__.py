"""Quantum evolution as parallel transport along the time axis.

Unitary evolution is computed as a product integral: the ordered
product of one-step exponentials of sign * i * H(t).  The package
provides the matrix algebra layer, inner derivations and their
superoperator form, transport steppers of orders 1, 2 and 4, scenario
runs with residual and picture-equivalence diagnostics, and a CLI.
"""

from ._kernels import BACKEND as kernel_backend
from .algebra import (
    HERMITICITY_RTOL,
    MAX_DIM,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    UNITARITY_TOL,
    ComplexMatrix,
    HermitianMatrix,
    UnitaryMatrix,
    adjoint,
    check_cstar_identity,
    commutator,
    identity,
    matrix_exp,
    operator_norm,
)
from .derivations import (
    InnerDerivation,
    Superoperator,
    apply_derivation,
    check_group_vs_superoperator,
    check_leibniz,
    check_star_compatibility,
    derivation_superoperator,
    one_parameter_group,
    unvec,
    vec,
)
from .errors import (
    ConfigError,
    DimensionMismatchError,
    DomainError,
    InvariantViolationError,
    NumericalError,
    ScenarioError,
    TransportqError,
)
from .paths import HamiltonianPath
from .scenarios import (
    ConvergenceStudy,
    RunReport,
    Scenario,
    builtin_names,
    builtin_scenario,
    check_picture_equivalence,
    estimate_convergence_order,
    expectation_value,
    random_hermitian,
    random_state,
    run_scenario,
    run_suite,
)
from .transport import (
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

__version__ = "0.1.0"

__all__ = [
    "ComplexMatrix",
    "ConfigError",
    "ConvergenceStudy",
    "DimensionMismatchError",
    "DomainError",
    "HamiltonianPath",
    "HermitianMatrix",
    "HERMITICITY_RTOL",
    "InnerDerivation",
    "InvariantViolationError",
    "MAX_DIM",
    "METHODS",
    "NumericalError",
    "RunReport",
    "Scenario",
    "ScenarioError",
    "Section",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "Superoperator",
    "TransportOperator",
    "TransportqError",
    "UNITARITY_TOL",
    "UnitaryMatrix",
    "adjoint",
    "apply_derivation",
    "builtin_names",
    "builtin_scenario",
    "check_cstar_identity",
    "check_group_vs_superoperator",
    "check_leibniz",
    "check_picture_equivalence",
    "check_star_compatibility",
    "commutator",
    "connection_apply",
    "derivation_superoperator",
    "estimate_convergence_order",
    "evolve_state",
    "expectation_value",
    "heisenberg_residual",
    "heisenberg_transport",
    "identity",
    "kernel_backend",
    "matrix_exp",
    "one_parameter_group",
    "operator_norm",
    "random_hermitian",
    "random_state",
    "run_scenario",
    "run_suite",
    "schrodinger_residual",
    "step",
    "transport",
    "unvec",
    "vec",
]
