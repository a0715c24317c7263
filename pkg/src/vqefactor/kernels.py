"""Backend selection for the hot loops.

The numba backend is used when numba imports cleanly, unless the environment
variable ``VQEFACTOR_DISABLE_NUMBA`` is set to a truthy value, in which case
the pure-numpy kernels are used. Both backends produce the same results to
rounding; the test suite checks them against each other.
"""

import os

from . import _kernels_numpy

_DISABLE = os.environ.get("VQEFACTOR_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

_impl = _kernels_numpy
BACKEND = "numpy"
if not _DISABLE:
    try:
        from . import _kernels_numba
    except ImportError:  # numba missing or broken
        pass
    else:
        _impl = _kernels_numba
        BACKEND = "numba"

OP_RY = _kernels_numpy.OP_RY
OP_CNOT = _kernels_numpy.OP_CNOT
OP_CZ = _kernels_numpy.OP_CZ
OP_H = _kernels_numpy.OP_H

apply_ry = _impl.apply_ry
apply_h = _impl.apply_h
apply_cnot = _impl.apply_cnot
apply_cz = _impl.apply_cz
apply_gates = _impl.apply_gates
cvar_exact_sorted = _impl.cvar_exact_sorted
cvar_counts_sorted = _impl.cvar_counts_sorted

__all__ = [
    "BACKEND",
    "OP_RY",
    "OP_CNOT",
    "OP_CZ",
    "OP_H",
    "apply_ry",
    "apply_h",
    "apply_cnot",
    "apply_cz",
    "apply_gates",
    "cvar_exact_sorted",
    "cvar_counts_sorted",
]
