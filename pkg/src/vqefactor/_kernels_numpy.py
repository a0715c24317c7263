"""Pure-numpy statevector and CVaR kernels.

Qubit 0 is the most significant bit of the amplitude index, so a gate on
qubit ``q`` of an ``n``-qubit register acts on index bit ``n - 1 - q``.
All kernels update ``state`` in place.
"""

import numpy as np

OP_RY = 0
OP_CNOT = 1
OP_CZ = 2
OP_H = 3

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


def _split(state, n_qubits, qubit):
    return state.reshape(1 << qubit, 2, 1 << (n_qubits - 1 - qubit))


def _split2(state, n_qubits, a, b):
    lo, hi = (a, b) if a < b else (b, a)
    view = state.reshape(1 << lo, 2, 1 << (hi - lo - 1), 2, 1 << (n_qubits - 1 - hi))
    return view, a < b


def apply_ry(state, n_qubits, qubit, theta):
    c = np.cos(0.5 * theta)
    s = np.sin(0.5 * theta)
    v = _split(state, n_qubits, qubit)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = c * a0 - s * a1
    v[:, 1, :] = s * a0 + c * a1


def apply_h(state, n_qubits, qubit):
    v = _split(state, n_qubits, qubit)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = _INV_SQRT2 * (a0 + a1)
    v[:, 1, :] = _INV_SQRT2 * (a0 - a1)


def apply_cnot(state, n_qubits, control, target):
    v, control_first = _split2(state, n_qubits, control, target)
    if control_first:
        tmp = v[:, 1, :, 0, :].copy()
        v[:, 1, :, 0, :] = v[:, 1, :, 1, :]
        v[:, 1, :, 1, :] = tmp
    else:
        tmp = v[:, 0, :, 1, :].copy()
        v[:, 0, :, 1, :] = v[:, 1, :, 1, :]
        v[:, 1, :, 1, :] = tmp


def apply_cz(state, n_qubits, a, b):
    v, _ = _split2(state, n_qubits, a, b)
    v[:, 1, :, 1, :] *= -1.0


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
            raise ValueError(f"unknown op code {op}")


def cvar_exact_sorted(probs, order, sorted_costs, alpha):
    """Lower-tail mean of mass ``alpha``; the boundary atom is weighted fractionally."""
    p = probs[order]
    cum = np.cumsum(p)
    k = int(np.searchsorted(cum, alpha, side="left"))
    if k >= p.shape[0]:
        k = p.shape[0] - 1
    below = cum[k - 1] if k > 0 else 0.0
    total = float(np.dot(p[:k], sorted_costs[:k])) + (alpha - below) * float(sorted_costs[k])
    return total / alpha


def cvar_counts_sorted(counts, order, sorted_costs, tail):
    """Mean and squared-deviation sum of the ``tail`` smallest sampled costs."""
    c = counts[order]
    cum = np.cumsum(c)
    k = int(np.searchsorted(cum, tail, side="left"))
    take = c[: k + 1].astype(np.float64)
    below = cum[k - 1] if k > 0 else 0
    take[k] = tail - below
    vals = sorted_costs[: k + 1].astype(np.float64)
    mean = float(np.dot(take, vals)) / tail
    ssd = float(np.dot(take, (vals - mean) ** 2))
    return mean, ssd
