"""Prime factorization with CVaR-VQE on a real-amplitude statevector simulator."""

from .cvar import CvarEstimate, CvarEvaluator, TailTooSmallError, cvar_exact, cvar_sampled, cvar_std_error
from .hamiltonian import (
    BooleanPolynomial,
    CostFunction,
    PauliZTerm,
    build_polynomial,
    cost_table,
    cost_value,
    eigenvalue,
    eigenvalue_table,
    to_pauli_terms,
)
from .instance import (
    FactoringInstance,
    decode,
    encode,
    enumerate_instances,
    make_benchmark_instance,
    make_instance,
    solution_labels,
)
from .kernels import BACKEND
from .optimize import OptimizationTrace, OptimizerConfig, minimize_cobyla, minimize_nft
from .simulator import (
    AnsatzSpec,
    ShotSample,
    StateVector,
    exact_energy,
    fidelity,
    prepare_state,
    probabilities,
    sample_shots,
)
from .vqe import RunConfig, VqeRunRecord, run_vqe, run_with_alpha_schedule, success_probability

__version__ = "0.1.0"

__all__ = [
    "CvarEstimate",
    "CvarEvaluator",
    "TailTooSmallError",
    "cvar_exact",
    "cvar_sampled",
    "cvar_std_error",
    "BooleanPolynomial",
    "CostFunction",
    "PauliZTerm",
    "build_polynomial",
    "cost_table",
    "cost_value",
    "eigenvalue",
    "eigenvalue_table",
    "to_pauli_terms",
    "FactoringInstance",
    "decode",
    "encode",
    "enumerate_instances",
    "make_benchmark_instance",
    "make_instance",
    "solution_labels",
    "BACKEND",
    "OptimizationTrace",
    "OptimizerConfig",
    "minimize_cobyla",
    "minimize_nft",
    "AnsatzSpec",
    "ShotSample",
    "StateVector",
    "exact_energy",
    "fidelity",
    "prepare_state",
    "probabilities",
    "sample_shots",
    "RunConfig",
    "VqeRunRecord",
    "run_vqe",
    "run_with_alpha_schedule",
    "success_probability",
]
