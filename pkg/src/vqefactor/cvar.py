"""Conditional value at risk of the lower cost tail, sampled and exact."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import kernels


class TailTooSmallError(ValueError):
    """The standard error needs at least two samples in the tail."""


@dataclass(frozen=True)
class CvarEstimate:
    alpha: float
    shots: int | None  # None for the exact (infinite-shot) value
    value: float
    std_error: float | None = None
    tail_size: int | None = None


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")


def tail_size(alpha: float, shots: int) -> int:
    """ceil(alpha * shots), robust to binary rounding of alpha (0.07 * 100 -> 7)."""
    _check_alpha(alpha)
    return max(1, math.ceil(round(alpha * shots, 9)))


def _sorted_tail(costs, alpha):
    arr = np.sort(np.asarray(costs).ravel(), kind="stable")
    if arr.size == 0:
        raise ValueError("empty sample")
    k = tail_size(alpha, arr.size)
    return arr[:k], arr.size


def cvar_sampled(costs, alpha: float) -> CvarEstimate:
    tail, S = _sorted_tail(costs, alpha)
    value = float(np.mean(tail.astype(np.float64)))
    se = _std_error(tail, value) if tail.size >= 2 else None
    return CvarEstimate(alpha, S, value, se, int(tail.size))


def _std_error(tail, value):
    k = tail.size
    dev = tail.astype(np.float64) - value
    return math.sqrt(float(np.dot(dev, dev)) / (k * (k - 1)))


def cvar_std_error(costs, alpha: float) -> float:
    tail, _ = _sorted_tail(costs, alpha)
    if tail.size < 2:
        raise TailTooSmallError(f"tail of size {tail.size} has no standard error")
    return _std_error(tail, float(np.mean(tail.astype(np.float64))))


def cvar_exact(distribution: Mapping, alpha: float) -> CvarEstimate:
    """Exact lower-tail CVaR of a finite distribution ``{value: probability}``.

    Mass is accumulated in ascending value order; the atom straddling
    ``alpha`` contributes only the mass still needed.
    """
    _check_alpha(alpha)
    items = sorted(distribution.items())
    total = sum(p for _, p in items)
    if abs(total - 1.0) > 1e-9 or any(p < 0 for _, p in items):
        raise ValueError(f"distribution must be non-negative and sum to 1, got total {total}")
    values = np.array([v for v, _ in items], dtype=np.float64)
    probs = np.array([p for _, p in items], dtype=np.float64)
    order = np.arange(values.size, dtype=np.int64)
    value = kernels.cvar_exact_sorted(probs, order, values, float(alpha))
    return CvarEstimate(alpha, None, float(value))


class CvarEvaluator:
    """CVaR over a fixed per-label cost table, reused across many states.

    The label order by ascending cost is computed once, so each evaluation is
    a single pass over probabilities or shot counts.
    """

    def __init__(self, costs: np.ndarray):
        self.costs = np.asarray(costs)
        self.order = np.argsort(self.costs, kind="stable").astype(np.int64)
        self.sorted_costs = self.costs[self.order].astype(np.float64)
        self.sorted_exact = self.costs[self.order]

    def exact(self, probs: np.ndarray, alpha: float) -> float:
        _check_alpha(alpha)
        return float(kernels.cvar_exact_sorted(probs, self.order, self.sorted_costs, float(alpha)))

    def from_counts(self, counts: np.ndarray, alpha: float) -> CvarEstimate:
        shots = int(counts.sum())
        k = tail_size(alpha, shots)
        mean, ssd = kernels.cvar_counts_sorted(counts, self.order, self.sorted_costs, k)
        se = math.sqrt(ssd / (k * (k - 1))) if k >= 2 else None
        return CvarEstimate(alpha, shots, float(mean), se, k)

    def distribution(self, probs: np.ndarray) -> dict:
        """Probability mass per distinct cost value."""
        out: dict = {}
        for c, p in zip(self.costs.tolist(), probs.tolist()):
            out[c] = out.get(c, 0.0) + p
        return out
