"""One CVaR-VQE run: ansatz state -> per-label costs -> CVaR -> optimizer.

Two regimes are supported. In exact mode (``shots=None``) the objective is
the infinite-shot CVaR of the state's cost distribution and success means
the solution probability exceeded the fidelity threshold at some
evaluation. In sampled mode each evaluation draws ``shots`` measurements and
success means a solution label was observed; the exact fidelity is still
tracked as a diagnostic for registers up to ``SHADOW_MAX_QUBITS``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .cvar import CvarEvaluator
from .hamiltonian import CostFunction, cost_table
from .instance import FactoringInstance, solution_indices
from .optimize import OptimizationTrace, OptimizerConfig, minimize
from .simulator import AnsatzSpec, CompiledAnsatz, sample_counts

SHADOW_MAX_QUBITS = 20


@dataclass(frozen=True)
class RunConfig:
    instance: FactoringInstance
    ansatz: AnsatzSpec
    alpha: float = 0.1
    shots: int | None = None
    cost: CostFunction = field(default_factory=CostFunction)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    fidelity_threshold: float = 0.01
    seed: int = 0
    initial_params: object = "random"  # "random", "zeros" or an explicit vector
    initial_state: str = "zeros"
    alpha_schedule: tuple | None = None
    stop_on_success: bool = False

    def __post_init__(self):
        if self.ansatz.N != self.instance.N:
            raise ValueError(f"ansatz has {self.ansatz.N} qubits, instance needs {self.instance.N}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.shots is not None and self.shots < 1:
            raise ValueError(f"shots must be >= 1 or None, got {self.shots}")
        if not 0.0 <= self.fidelity_threshold < 1.0:
            raise ValueError(f"fidelity threshold must lie in [0, 1), got {self.fidelity_threshold}")
        if not self.instance.known:
            raise ValueError("VQE runs need an instance with known factors to score success")

    @property
    def max_evals(self) -> int:
        if self.optimizer.max_evals is not None:
            return self.optimizer.max_evals
        return 50 * self.ansatz.N * self.ansatz.L

    def initial_theta(self) -> np.ndarray:
        k = self.ansatz.parameter_count
        if isinstance(self.initial_params, str):
            if self.initial_params == "zeros":
                return np.zeros(k)
            if self.initial_params != "random":
                raise ValueError(f"unknown initial_params {self.initial_params!r}")
            rng = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(0,)))
            return rng.uniform(-math.pi, math.pi, size=k)
        theta = np.asarray(self.initial_params, dtype=np.float64)
        if theta.shape != (k,):
            raise ValueError(f"expected {k} initial parameters, got shape {theta.shape}")
        return theta.copy()

    def to_json(self) -> dict:
        init = self.initial_params
        if not isinstance(init, str):
            init = [float(x) for x in np.asarray(init).ravel()]
        opt = self.optimizer.to_json()
        opt["max_evals"] = self.max_evals
        return {
            "instance": self.instance.to_json(),
            "ansatz": self.ansatz.to_json(),
            "alpha": self.alpha,
            "shots": self.shots,
            "cost": self.cost.to_json(),
            "optimizer": opt,
            "fidelity_threshold": self.fidelity_threshold,
            "seed": self.seed,
            "initial_params": init,
            "initial_state": self.initial_state,
            "alpha_schedule": list(self.alpha_schedule) if self.alpha_schedule else None,
            "stop_on_success": self.stop_on_success,
        }


@dataclass
class VqeRunRecord:
    config: RunConfig
    trace: OptimizationTrace
    initial_theta: np.ndarray
    fidelity_trajectory: list  # exact: fidelity per eval; sampled: solution hits per eval
    max_fidelity: float | None
    first_success_eval: int | None
    success: bool
    wall_time: float = 0.0
    shadow_fidelity: list | None = None
    std_error_trajectory: list | None = None
    first_threshold_eval: int | None = None

    @property
    def cost_trajectory(self) -> list:
        return self.trace.values

    @property
    def threshold_reached(self) -> bool:
        return self.first_threshold_eval is not None

    def running_max_fidelity(self) -> list:
        fids = self.fidelity_trajectory if self.config.shots is None else self.shadow_fidelity
        if fids is None:
            return []
        return np.maximum.accumulate(np.asarray(fids, dtype=np.float64)).tolist()

    def to_json(self, include_timing: bool = False) -> dict:
        out = {
            "config": self.config.to_json(),
            "mode": "exact" if self.config.shots is None else "sampled",
            "success": self.success,
            "first_success_eval": self.first_success_eval,
            "first_threshold_eval": self.first_threshold_eval,
            "max_fidelity": self.max_fidelity,
            "n_evals": self.trace.n_evals,
            "termination": self.trace.termination,
            "best_cost": self.trace.best_cost,
            "best_theta": [float(x) for x in self.trace.best_theta],
            "initial_theta": [float(x) for x in self.initial_theta],
            "cost_trajectory": [float(x) for x in self.trace.values],
            "fidelity_trajectory": list(self.fidelity_trajectory),
            "shadow_fidelity": self.shadow_fidelity,
            "std_error_trajectory": self.std_error_trajectory,
        }
        if include_timing:
            out["wall_time"] = self.wall_time
        return out


def _first_index(flags) -> int | None:
    for i, ok in enumerate(flags):
        if ok:
            return i + 1
    return None


def run_vqe(config: RunConfig) -> VqeRunRecord:
    inst = config.instance
    compiled = CompiledAnsatz(config.ansatz)
    evaluator = CvarEvaluator(cost_table(inst, config.cost))
    sol = solution_indices(inst)
    buffer = np.empty(1 << inst.N, dtype=np.float64)
    alpha = config.alpha
    t = config.fidelity_threshold
    exact = config.shots is None
    shadow = not exact and inst.N <= SHADOW_MAX_QUBITS

    fids: list = []
    hits: list = []
    shadow_fids: list = []
    std_errors: list = []
    status = {"done": False}

    def objective(theta):
        state = compiled.run(theta, config.initial_state, out=buffer)
        probs = state * state
        if exact:
            f = float(probs[sol].sum())
            fids.append(f)
            status["done"] = f > t
            return evaluator.exact(probs, alpha)
        index = len(hits) + 1
        rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(1, index)))
        counts = sample_counts(probs, config.shots, rng)
        est = evaluator.from_counts(counts, alpha)
        h = int(counts[sol].sum())
        hits.append(h)
        std_errors.append(est.std_error)
        if shadow:
            shadow_fids.append(float(probs[sol].sum()))
        status["done"] = h > 0
        return est.value

    def callback(index, theta, value):
        return config.stop_on_success and status["done"]

    theta0 = config.initial_theta()
    opt = replace(config.optimizer, max_evals=config.max_evals)
    start = time.perf_counter()
    trace = minimize(objective, theta0, opt, callback)
    wall = time.perf_counter() - start

    if exact:
        first = _first_index(f > t for f in fids)
        return VqeRunRecord(
            config, trace, theta0, fids, max(fids) if fids else 0.0, first, first is not None, wall,
            first_threshold_eval=first,
        )
    first = _first_index(h > 0 for h in hits)
    threshold = _first_index(f > t for f in shadow_fids) if shadow else None
    return VqeRunRecord(
        config,
        trace,
        theta0,
        hits,
        max(shadow_fids) if shadow_fids else None,
        first,
        first is not None,
        wall,
        shadow_fidelity=shadow_fids if shadow else None,
        std_error_trajectory=std_errors,
        first_threshold_eval=threshold,
    )


def run_with_alpha_schedule(config: RunConfig) -> list[VqeRunRecord]:
    """Try each alpha of the schedule in order until one run succeeds."""
    if not config.alpha_schedule:
        raise ValueError("alpha_schedule must be a non-empty sequence")
    records = []
    for alpha in config.alpha_schedule:
        rec = run_vqe(replace(config, alpha=float(alpha)))
        records.append(rec)
        if rec.success:
            break
    return records


def success_probability(t: float, shots: int) -> float:
    """Chance of seeing the solution at least once in ``shots`` draws at fidelity ``t``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    return 1.0 - (1.0 - t) ** shots
