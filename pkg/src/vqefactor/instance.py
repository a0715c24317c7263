"""Factoring instances, qubit layouts and the bitstring <-> (p, q) encoding.

A label is the printed computational-basis state
``p_{Np-1} ... p_1 q_{Nq-1} ... q_1``; the least significant bits
``p_0 = q_0 = 1`` are implicit. Qubit 0 is the leftmost character.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def bit_length_p(n: int) -> int:
    """Bits reserved for the smaller factor: ceil(log2(sqrt(n))), exactly."""
    r = math.isqrt(n)
    if r * r == n:
        return (r - 1).bit_length()
    # sqrt(n) lies strictly in (r, r + 1); the smallest power of two >= it is >= r + 1
    return r.bit_length()


@dataclass(frozen=True)
class FactoringInstance:
    n: int
    B: int
    Np: int
    Nq: int
    p_true: int | None = None
    q_true: int | None = None

    @property
    def N(self) -> int:
        return self.Np + self.Nq - 2

    @property
    def known(self) -> bool:
        return self.p_true is not None

    @property
    def degenerate(self) -> bool:
        """Whether both factor orderings fit the register (two ground states)."""
        self._require_factors()
        return self.p_true != self.q_true and self.q_true < (1 << self.Np)

    def _require_factors(self) -> None:
        if self.p_true is None:
            raise ValueError(f"factors of n={self.n} are not known for this instance")

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "p": self.p_true,
            "q": self.q_true,
            "B": self.B,
            "Np": self.Np,
            "Nq": self.Nq,
            "N": self.N,
        }

    @classmethod
    def from_json(cls, data: dict) -> "FactoringInstance":
        inst = make_instance(int(data["n"]), n_p=data.get("Np"), n_q=data.get("Nq"))
        if data.get("p") is not None:
            inst = with_factors(inst, int(data["p"]), int(data["q"]))
        return inst


def make_instance(n: int, *, n_p: int | None = None, n_q: int | None = None) -> FactoringInstance:
    """Instance for odd ``n >= 9`` with the standard bit budgets.

    ``n_p``/``n_q`` override the derived budgets (toy layouts such as a
    2-qubit encoding of 9); each must be at least 1.
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise TypeError(f"n must be an integer, got {type(n).__name__}")
    n = int(n)
    if n < 9:
        raise ValueError(f"n must be >= 9, got {n}")
    if n % 2 == 0:
        raise ValueError(f"n must be odd, got {n}")
    B = n.bit_length()
    Np = bit_length_p(n) if n_p is None else int(n_p)
    Nq = B - 1 if n_q is None else int(n_q)
    if Np < 1 or Nq < 1 or Np + Nq - 2 < 1:
        raise ValueError(f"invalid layout Np={Np}, Nq={Nq}")
    return FactoringInstance(n=n, B=B, Np=Np, Nq=Nq)


def _is_prime(k: int) -> bool:
    if k < 2:
        return False
    if k % 2 == 0:
        return k == 2
    f = 3
    while f * f <= k:
        if k % f == 0:
            return False
        f += 2
    return True


def with_factors(inst: FactoringInstance, p: int, q: int) -> FactoringInstance:
    """Attach the known factorization, validating it against the layout."""
    p, q = sorted((int(p), int(q)))
    if p * q != inst.n:
        raise ValueError(f"{p} * {q} != {inst.n}")
    if not (_is_prime(p) and _is_prime(q)) or p == 2:
        raise ValueError(f"{p} and {q} must both be odd primes")
    if p >= (1 << inst.Np) or q >= (1 << inst.Nq):
        raise ValueError(f"factors ({p}, {q}) do not fit Np={inst.Np}, Nq={inst.Nq}")
    return FactoringInstance(inst.n, inst.B, inst.Np, inst.Nq, p, q)


def factor_trial(n: int) -> tuple[int, int] | None:
    """(p, q) with p <= q if ``n`` is an odd semiprime, else None."""
    if n % 2 == 0:
        return None
    f = 3
    while f * f <= n:
        if n % f == 0:
            q = n // f
            return (f, q) if _is_prime(q) else None
        f += 2
    return None


def make_benchmark_instance(n: int, **layout) -> FactoringInstance:
    """Like :func:`make_instance` but also factors ``n`` by trial division."""
    inst = make_instance(n, **layout)
    pq = factor_trial(inst.n)
    if pq is None:
        raise ValueError(f"{n} is not an odd semiprime")
    return with_factors(inst, *pq)


def decode(inst: FactoringInstance, bitstring: str) -> tuple[int, int]:
    if len(bitstring) != inst.N or any(c not in "01" for c in bitstring):
        raise ValueError(f"expected a {inst.N}-bit label, got {bitstring!r}")
    split = inst.Np - 1
    p_bits = bitstring[:split]
    q_bits = bitstring[split:]
    p = (int(p_bits, 2) << 1 | 1) if p_bits else 1
    q = (int(q_bits, 2) << 1 | 1) if q_bits else 1
    return p, q


def encode(inst: FactoringInstance, p: int, q: int) -> str:
    if p % 2 == 0 or q % 2 == 0 or p < 1 or q < 1:
        raise ValueError(f"p and q must be odd and positive, got ({p}, {q})")
    if p >= (1 << inst.Np) or q >= (1 << inst.Nq):
        raise ValueError(f"({p}, {q}) overflows Np={inst.Np}, Nq={inst.Nq}")
    hp, hq = inst.Np - 1, inst.Nq - 1
    p_part = format(p >> 1, f"0{hp}b") if hp else ""
    q_part = format(q >> 1, f"0{hq}b") if hq else ""
    return p_part + q_part


def label_index(bitstring: str) -> int:
    return int(bitstring, 2)


def index_label(inst: FactoringInstance, index: int) -> str:
    return format(index, f"0{inst.N}b")


def solution_labels(inst: FactoringInstance) -> frozenset[str]:
    inst._require_factors()
    labels = {encode(inst, inst.p_true, inst.q_true)}
    if inst.q_true < (1 << inst.Np) and inst.p_true < (1 << inst.Nq):
        labels.add(encode(inst, inst.q_true, inst.p_true))
    return frozenset(labels)


def solution_indices(inst: FactoringInstance) -> np.ndarray:
    return np.array(sorted(label_index(s) for s in solution_labels(inst)), dtype=np.int64)


def factor_arrays(inst: FactoringInstance) -> tuple[np.ndarray, np.ndarray]:
    """Candidate (p, q) for every label index, as int64 arrays of length 2**N."""
    idx = np.arange(1 << inst.N, dtype=np.int64)
    hq = inst.Nq - 1
    p = ((idx >> hq) << 1) | 1
    q = ((idx & ((1 << hq) - 1)) << 1) | 1
    return p, q


def _bits_for_qubits(N: int) -> int | None:
    # N = ceil(B/2) + B - 3 for every odd n with B bits; strictly increasing in B
    B = 4
    while True:
        got = (B + 1) // 2 + B - 3
        if got == N:
            return B
        if got > N:
            return None
        B += 1


def _smallest_prime_factor(limit: int) -> np.ndarray:
    spf = np.zeros(limit, dtype=np.int64)
    for i in range(2, math.isqrt(limit - 1) + 1):
        if spf[i] == 0:
            block = spf[i * i :: i]
            block[block == 0] = i
    nz = spf == 0
    spf[nz] = np.arange(limit)[nz]
    return spf


def enumerate_instances(N: int, *, include_squares: bool = False) -> list[FactoringInstance]:
    """All odd semiprimes requiring exactly ``N`` qubits, ascending.

    Squares of primes (p == q) are left out unless ``include_squares``; the
    published table of largest n per qubit count skips them (25 for N=5).
    """
    if N < 3:
        raise ValueError(f"N must be >= 3, got {N}")
    B = _bits_for_qubits(N)
    if B is None:
        return []
    lo, hi = 1 << (B - 1), 1 << B
    spf = _smallest_prime_factor(hi)
    n = np.arange(lo + 1, hi, 2, dtype=np.int64)
    p = spf[n]
    q = n // p
    mask = (p != n) & (spf[q] == q) & ((p <= q) if include_squares else (p < q))
    out = []
    for nn, pp, qq in zip(n[mask].tolist(), p[mask].tolist(), q[mask].tolist()):
        inst = make_instance(nn)
        if inst.N != N:  # pragma: no cover - guarded by _bits_for_qubits
            continue
        out.append(FactoringInstance(inst.n, inst.B, inst.Np, inst.Nq, pp, qq))
    return out
