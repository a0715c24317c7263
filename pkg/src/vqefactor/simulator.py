"""Real-amplitude statevector simulation of the RY + entangler ansatze."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .hamiltonian import eigenvalue_table
from .instance import FactoringInstance, index_label, solution_indices

FAMILIES = ("linear_cnot", "circular_cnot", "parallel_cnot", "parallel_cz")
INITIAL_STATES = ("zeros", "plus")


@dataclass(frozen=True)
class Gate:
    op: int
    q0: int
    q1: int = -1
    param: int = -1  # index into theta for RY, -1 otherwise


@dataclass(frozen=True)
class AnsatzSpec:
    """L blocks of per-qubit RY separated by L - 1 entangling layers.

    ``parallel_offset`` selects the pairing of the parallel families:
    "fixed" pairs (0,1), (2,3), ... in every layer; "alternate" shifts the
    pairing to (1,2), (3,4), ... on odd-numbered entangling layers.
    Parameter ``l * N + q`` drives the RY on qubit ``q`` in block ``l``.
    """

    family: str
    N: int
    L: int
    parallel_offset: str = "fixed"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown ansatz family {self.family!r}; expected one of {FAMILIES}")
        if self.N < 1 or self.L < 1:
            raise ValueError(f"need N >= 1 and L >= 1, got N={self.N}, L={self.L}")
        if self.parallel_offset not in ("fixed", "alternate"):
            raise ValueError(f"parallel_offset must be 'fixed' or 'alternate', got {self.parallel_offset!r}")

    @property
    def parameter_count(self) -> int:
        return self.N * self.L

    def entangling_layer(self, layer: int) -> list[Gate]:
        N = self.N
        if self.family in ("linear_cnot", "circular_cnot"):
            gates = [Gate(kernels.OP_CNOT, i, i + 1) for i in range(N - 1)]
            if self.family == "circular_cnot" and N > 1:
                gates.append(Gate(kernels.OP_CNOT, N - 1, 0))
            return gates
        op = kernels.OP_CNOT if self.family == "parallel_cnot" else kernels.OP_CZ
        start = layer % 2 if self.parallel_offset == "alternate" else 0
        return [Gate(op, i, i + 1) for i in range(start, N - 1, 2)]

    def gates(self) -> list[Gate]:
        out = []
        for layer in range(self.L):
            out.extend(Gate(kernels.OP_RY, q, param=layer * self.N + q) for q in range(self.N))
            if layer < self.L - 1:
                out.extend(self.entangling_layer(layer))
        return out

    def gate_counts(self) -> dict:
        counts = {"ry": 0, "cnot": 0, "cz": 0}
        names = {kernels.OP_RY: "ry", kernels.OP_CNOT: "cnot", kernels.OP_CZ: "cz"}
        for g in self.gates():
            counts[names[g.op]] += 1
        return counts

    def to_json(self) -> dict:
        return {"family": self.family, "N": self.N, "L": self.L, "parallel_offset": self.parallel_offset}


class CompiledAnsatz:
    """Gate arrays ready for the kernels; reuse across evaluations."""

    def __init__(self, spec: AnsatzSpec):
        self.spec = spec
        gates = spec.gates()
        self.ops = np.array([g.op for g in gates], dtype=np.int64)
        self.q0 = np.array([g.q0 for g in gates], dtype=np.int64)
        self.q1 = np.array([g.q1 for g in gates], dtype=np.int64)
        self.param = np.array([g.param for g in gates], dtype=np.int64)
        self._is_ry = self.param >= 0
        self._angles = np.zeros(len(gates), dtype=np.float64)

    def run(self, theta, initial: str = "zeros", out: np.ndarray | None = None) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (self.spec.parameter_count,):
            raise ValueError(f"expected {self.spec.parameter_count} parameters, got shape {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise ValueError("parameters must be finite")
        dim = 1 << self.spec.N
        state = np.empty(dim, dtype=np.float64) if out is None else out
        if initial == "zeros":
            state[:] = 0.0
            state[0] = 1.0
        elif initial == "plus":
            state[:] = 1.0 / np.sqrt(dim)
        else:
            raise ValueError(f"initial must be one of {INITIAL_STATES}, got {initial!r}")
        self._angles[self._is_ry] = theta[self.param[self._is_ry]]
        kernels.apply_gates(state, self.spec.N, self.ops, self.q0, self.q1, self._angles)
        return state


@dataclass
class StateVector:
    amplitudes: np.ndarray
    N: int

    def __post_init__(self):
        if self.amplitudes.shape != (1 << self.N,):
            raise ValueError(f"expected {1 << self.N} amplitudes, got {self.amplitudes.shape}")


def prepare_state(spec: AnsatzSpec, theta, initial: str = "zeros") -> StateVector:
    return StateVector(CompiledAnsatz(spec).run(theta, initial), spec.N)


def probabilities(state: StateVector) -> np.ndarray:
    return state.amplitudes * state.amplitudes


def _check_dims(state: StateVector, inst: FactoringInstance) -> None:
    if state.N != inst.N:
        raise ValueError(f"state has {state.N} qubits but instance needs {inst.N}")


def exact_energy(state: StateVector, inst: FactoringInstance) -> float:
    _check_dims(state, inst)
    return float(np.dot(probabilities(state), eigenvalue_table(inst).astype(np.float64)))


def fidelity(state: StateVector, inst: FactoringInstance) -> float:
    _check_dims(state, inst)
    return float(probabilities(state)[solution_indices(inst)].sum())


@dataclass(frozen=True)
class ShotSample:
    counts: dict
    total: int


def sample_counts(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial counts per label index for ``shots`` independent draws."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    p = np.clip(probs, 0.0, None)
    return rng.multinomial(shots, p / p.sum())


def sample_shots(state: StateVector, shots: int, rng: np.random.Generator) -> ShotSample:
    counts = sample_counts(probabilities(state), shots, rng)
    nz = np.flatnonzero(counts)
    labels = {format(int(i), f"0{state.N}b"): int(counts[i]) for i in nz}
    return ShotSample(labels, int(shots))


def basis_state(N: int, bitstring: str) -> StateVector:
    amps = np.zeros(1 << N)
    amps[int(bitstring, 2)] = 1.0
    return StateVector(amps, N)


__all__ = [
    "FAMILIES",
    "AnsatzSpec",
    "CompiledAnsatz",
    "StateVector",
    "ShotSample",
    "prepare_state",
    "probabilities",
    "exact_energy",
    "fidelity",
    "sample_counts",
    "sample_shots",
    "basis_state",
    "index_label",
]
