"""The diagonal factoring Hamiltonian (n - PQ)^2 and its cost transforms.

Three views of the same operator are kept:

* ``BooleanPolynomial``: exact multilinear polynomial in the qubit bits,
* a list of ``PauliZTerm`` obtained by substituting x -> (1 - z) / 2,
* the direct eigenvalue oracle ``(n - p q)^2`` on decoded labels.

Only the oracle is used when running VQE; the other two exist for export and
cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from itertools import combinations

import numpy as np

from .instance import FactoringInstance, decode, factor_arrays

# Exact int64 eigenvalues need |n - pq|^2 < 2^63; |n - pq| < 2^(N + 2).
MAX_TABLE_QUBITS = 29


@dataclass(frozen=True)
class BooleanPolynomial:
    """Multilinear integer polynomial over the N label bits.

    ``terms`` maps a frozenset of qubit indices to its coefficient; the
    empty set carries the constant.
    """

    n_vars: int
    terms: dict = field(default_factory=dict)

    @property
    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    def evaluate(self, bits) -> int:
        """Value at a 0/1 assignment; ``bits`` is a label string or sequence."""
        if isinstance(bits, str):
            bits = [int(c) for c in bits]
        ones = {i for i, b in enumerate(bits) if b}
        return sum(c for k, c in self.terms.items() if k <= ones)

    def evaluate_all(self) -> np.ndarray:
        """Values on every label index, via boolean masks (int64)."""
        N = self.n_vars
        idx = np.arange(1 << N, dtype=np.int64)
        out = np.zeros(1 << N, dtype=np.int64)
        for key, coeff in self.terms.items():
            mask = 0
            for i in key:
                mask |= 1 << (N - 1 - i)
            out += np.where((idx & mask) == mask, np.int64(coeff), np.int64(0))
        return out


def _mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            k = ka | kb  # x^2 = x for binaries
            out[k] = out.get(k, 0) + ca * cb
    return {k: c for k, c in out.items() if c != 0}


def _register(inst: FactoringInstance) -> tuple[dict, dict]:
    """P and Q as linear polynomials with the implicit LSB already set to 1."""
    empty = frozenset()
    P = {empty: 1}
    Q = {empty: 1}
    hp = inst.Np - 1
    for i in range(hp):
        P[frozenset({i})] = 1 << (hp - i)
    hq = inst.Nq - 1
    for k in range(hq):
        Q[frozenset({hp + k})] = 1 << (hq - k)
    return P, Q


def build_polynomial(inst: FactoringInstance) -> BooleanPolynomial:
    P, Q = _register(inst)
    residual = {k: -c for k, c in _mul(P, Q).items()}
    residual[frozenset()] = residual.get(frozenset(), 0) + inst.n
    return BooleanPolynomial(inst.N, _mul(residual, residual))


@dataclass(frozen=True)
class PauliZTerm:
    coefficient: Fraction
    z_mask: frozenset

    def pauli_string(self, n_qubits: int) -> str:
        return "".join("Z" if i in self.z_mask else "I" for i in range(n_qubits))


def to_pauli_terms(poly: BooleanPolynomial) -> list[PauliZTerm]:
    acc: dict = {}
    for key, coeff in poly.terms.items():
        scale = Fraction(coeff, 1 << len(key))
        members = sorted(key)
        for r in range(len(members) + 1):
            sign = -1 if r % 2 else 1
            for sub in combinations(members, r):
                m = frozenset(sub)
                acc[m] = acc.get(m, Fraction(0)) + sign * scale
    terms = [PauliZTerm(c, m) for m, c in acc.items() if c != 0]
    terms.sort(key=lambda t: (len(t.z_mask), sorted(t.z_mask)))
    return terms


def evaluate_pauli(terms: list[PauliZTerm], bitstring: str) -> Fraction:
    total = Fraction(0)
    for t in terms:
        parity = sum(bitstring[i] == "1" for i in t.z_mask) % 2
        total += -t.coefficient if parity else t.coefficient
    return total


def evaluate_pauli_all(terms: list[PauliZTerm], n_qubits: int) -> np.ndarray:
    """Exact values on every basis state, returned as int64 (raises if non-integral)."""
    denom = 1
    for t in terms:
        denom = max(denom, t.coefficient.denominator)
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    out = np.zeros(1 << n_qubits, dtype=np.int64)
    for t in terms:
        scaled = t.coefficient * denom
        if scaled.denominator != 1:
            raise ValueError("non-dyadic coefficient")
        mask = 0
        for i in t.z_mask:
            mask |= 1 << (n_qubits - 1 - i)
        parity = np.zeros_like(idx)
        m = idx & mask
        while mask:
            parity ^= m & 1
            m >>= 1
            mask >>= 1
        out += np.int64(int(scaled)) * (1 - 2 * parity)
    if np.any(out % denom):
        raise ValueError("Pauli sum is not integral on some basis state")
    return out // denom


def _exact_decimal(c: Fraction) -> str:
    d = Decimal(c.numerator) / Decimal(c.denominator)
    text = format(d.normalize(), "f")
    return text


def pauli_to_text(terms: list[PauliZTerm], n_qubits: int) -> str:
    """One ``coeff<TAB>ZZI..`` line per term, qubit 0 leftmost."""
    return "".join(f"{_exact_decimal(t.coefficient)}\t{t.pauli_string(n_qubits)}\n" for t in terms)


def pauli_from_text(text: str) -> list[PauliZTerm]:
    terms = []
    for line in text.splitlines():
        if not line.strip():
            continue
        coeff, label = line.split("\t")
        mask = frozenset(i for i, ch in enumerate(label.strip()) if ch == "Z")
        terms.append(PauliZTerm(Fraction(Decimal(coeff)), mask))
    return terms


def eigenvalue(inst: FactoringInstance, bitstring: str) -> int:
    p, q = decode(inst, bitstring)
    return (inst.n - p * q) ** 2


def abs_residual_table(inst: FactoringInstance) -> np.ndarray:
    """|n - pq| for every label index (int64)."""
    if inst.N > MAX_TABLE_QUBITS:
        raise ValueError(f"N={inst.N} exceeds the exact int64 table limit of {MAX_TABLE_QUBITS}")
    p, q = factor_arrays(inst)
    return np.abs(np.int64(inst.n) - p * q)


def eigenvalue_table(inst: FactoringInstance) -> np.ndarray:
    r = abs_residual_table(inst)
    return r * r


COST_KINDS = ("hamiltonian", "logarithm", "inverse")


@dataclass(frozen=True)
class CostFunction:
    """Per-shot cost as a function of d = |n - pq|.

    hamiltonian: d^2; logarithm: ceil(log(d + 1)); inverse: -1 / (d + epsilon).
    ``log_base`` is one of "e", "2", "10".
    """

    kind: str = "hamiltonian"
    epsilon: float = 0.001
    log_base: str = "e"

    def __post_init__(self):
        if self.kind not in COST_KINDS:
            raise ValueError(f"unknown cost kind {self.kind!r}; expected one of {COST_KINDS}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.log_base not in ("e", "2", "10"):
            raise ValueError(f"log_base must be 'e', '2' or '10', got {self.log_base!r}")

    def of_residual(self, d: int):
        d = abs(int(d))
        if self.kind == "hamiltonian":
            return d * d
        if self.kind == "inverse":
            return -1.0 / (d + self.epsilon)
        m = d + 1
        if self.log_base == "2":
            return (m - 1).bit_length()
        if self.log_base == "10":
            return len(str(m - 1)) if m > 1 else 0
        return math.ceil(math.log(m))

    def table(self, residuals: np.ndarray) -> np.ndarray:
        """Vectorized transform; integer kinds stay int64."""
        d = np.asarray(residuals, dtype=np.int64)
        if self.kind == "hamiltonian":
            return d * d
        if self.kind == "inverse":
            return -1.0 / (d.astype(np.float64) + self.epsilon)
        if self.log_base == "e":
            return np.ceil(np.log(d.astype(np.float64) + 1.0)).astype(np.int64)
        return np.array([self.of_residual(x) for x in d.tolist()], dtype=np.int64)

    def to_json(self) -> dict:
        return {"kind": self.kind, "epsilon": self.epsilon, "log_base": self.log_base}


def cost_value(inst: FactoringInstance, bitstring: str, kind: CostFunction | str = "hamiltonian"):
    if isinstance(kind, str):
        kind = CostFunction(kind)
    p, q = decode(inst, bitstring)
    return kind.of_residual(inst.n - p * q)


def cost_table(inst: FactoringInstance, kind: CostFunction | str = "hamiltonian") -> np.ndarray:
    if isinstance(kind, str):
        kind = CostFunction(kind)
    return kind.table(abs_residual_table(inst))
