"""Numba-compiled versions of the kernels in ``_kernels_numpy``.

Same signatures, same in-place semantics. Stride loops visit each amplitude
pair once per gate.
"""

import math

import numpy as np
from numba import njit

from ._kernels_numpy import OP_CNOT, OP_CZ, OP_H, OP_RY

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


@njit(cache=True)
def apply_ry(state, n_qubits, qubit, theta):
    c = math.cos(0.5 * theta)
    s = math.sin(0.5 * theta)
    stride = 1 << (n_qubits - 1 - qubit)
    dim = state.shape[0]
    for base in range(0, dim, 2 * stride):
        for i in range(base, base + stride):
            a0 = state[i]
            a1 = state[i + stride]
            state[i] = c * a0 - s * a1
            state[i + stride] = s * a0 + c * a1


@njit(cache=True)
def apply_h(state, n_qubits, qubit):
    stride = 1 << (n_qubits - 1 - qubit)
    dim = state.shape[0]
    for base in range(0, dim, 2 * stride):
        for i in range(base, base + stride):
            a0 = state[i]
            a1 = state[i + stride]
            state[i] = _INV_SQRT2 * (a0 + a1)
            state[i + stride] = _INV_SQRT2 * (a0 - a1)


@njit(cache=True)
def apply_cnot(state, n_qubits, control, target):
    cbit = 1 << (n_qubits - 1 - control)
    tbit = 1 << (n_qubits - 1 - target)
    for i in range(state.shape[0]):
        if (i & cbit) != 0 and (i & tbit) == 0:
            j = i | tbit
            tmp = state[i]
            state[i] = state[j]
            state[j] = tmp


@njit(cache=True)
def apply_cz(state, n_qubits, a, b):
    mask = (1 << (n_qubits - 1 - a)) | (1 << (n_qubits - 1 - b))
    for i in range(state.shape[0]):
        if (i & mask) == mask:
            state[i] = -state[i]


@njit(cache=True)
def apply_gates(state, n_qubits, ops, q0, q1, angles):
    for g in range(ops.shape[0]):
        op = ops[g]
        if op == OP_RY:
            apply_ry(state, n_qubits, q0[g], angles[g])
        elif op == OP_CNOT:
            apply_cnot(state, n_qubits, q0[g], q1[g])
        elif op == OP_CZ:
            apply_cz(state, n_qubits, q0[g], q1[g])
        elif op == OP_H:
            apply_h(state, n_qubits, q0[g])
        else:
            raise ValueError("unknown op code")


@njit(cache=True)
def cvar_exact_sorted(probs, order, sorted_costs, alpha):
    total = 0.0
    mass = 0.0
    last = order.shape[0] - 1
    for r in range(order.shape[0]):
        p = probs[order[r]]
        if mass + p >= alpha or r == last:
            total += (alpha - mass) * sorted_costs[r]
            break
        total += p * sorted_costs[r]
        mass += p
    return total / alpha


@njit(cache=True)
def cvar_counts_sorted(counts, order, sorted_costs, tail):
    total = 0.0
    seen = 0
    k = 0
    for r in range(order.shape[0]):
        c = counts[order[r]]
        if seen + c >= tail:
            total += (tail - seen) * np.float64(sorted_costs[r])
            k = r
            break
        total += c * np.float64(sorted_costs[r])
        seen += c
    mean = total / tail
    ssd = 0.0
    seen = 0
    for r in range(k + 1):
        c = counts[order[r]]
        if r == k:
            c = tail - seen
        d = np.float64(sorted_costs[r]) - mean
        ssd += c * d * d
        seen += c
    return mean, ssd
