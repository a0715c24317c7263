"""Derivative-free minimizers: unconstrained COBYLA and NFT.

Both record every objective call in an :class:`OptimizationTrace` and stop
exactly at ``max_evals``. A callback ``callback(index, theta, value)`` that
returns a truthy value stops the run early.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

TERMINATIONS = ("converged", "budget_exhausted", "callback_stop", "nonfinite")
DEFAULT_MAX_EVALS = 1000


@dataclass(frozen=True)
class OptimizerConfig:
    method: str = "cobyla"
    max_evals: int | None = None  # None: caller's default (50*N*L in VQE runs)
    initial_trust_radius: float = 0.5
    final_trust_radius: float = 1e-4
    nft_sweep_order: str = "cyclic"
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("cobyla", "nft"):
            raise ValueError(f"unknown optimizer {self.method!r}")
        if self.max_evals is not None and self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if not 0 < self.final_trust_radius < self.initial_trust_radius:
            raise ValueError("need 0 < final_trust_radius < initial_trust_radius")
        if self.nft_sweep_order not in ("cyclic", "random"):
            raise ValueError(f"nft_sweep_order must be 'cyclic' or 'random', got {self.nft_sweep_order!r}")

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "max_evals": self.max_evals,
            "initial_trust_radius": self.initial_trust_radius,
            "final_trust_radius": self.final_trust_radius,
            "nft_sweep_order": self.nft_sweep_order,
            "seed": self.seed,
        }


@dataclass
class OptimizationTrace:
    thetas: list = field(default_factory=list)
    values: list = field(default_factory=list)
    best_theta: np.ndarray | None = None
    best_cost: float = math.inf
    termination: str = "budget_exhausted"

    @property
    def evaluations(self) -> list[tuple[np.ndarray, float, int]]:
        """(theta, value, 1-based evaluation index) per objective call."""
        return [(t, v, i + 1) for i, (t, v) in enumerate(zip(self.thetas, self.values))]

    @property
    def n_evals(self) -> int:
        return len(self.values)


class _Stop(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class _Budgeted:
    def __init__(self, objective, max_evals, callback, trace):
        self.objective = objective
        self.max_evals = max_evals
        self.callback = callback
        self.trace = trace

    @property
    def remaining(self) -> int:
        return self.max_evals - self.trace.n_evals

    def __call__(self, x: np.ndarray) -> float:
        if self.remaining <= 0:
            raise _Stop("budget_exhausted")
        x = np.array(x, dtype=np.float64)
        f = float(self.objective(x))
        tr = self.trace
        tr.thetas.append(x)
        tr.values.append(f)
        if not math.isfinite(f):
            raise _Stop("nonfinite")
        if f < tr.best_cost:
            tr.best_cost = f
            tr.best_theta = x
        if self.callback is not None and self.callback(tr.n_evals, x, f):
            raise _Stop("callback_stop")
        if self.remaining <= 0:
            raise _Stop("budget_exhausted")
        return f


def _run(body, objective, theta0, config, callback) -> OptimizationTrace:
    trace = OptimizationTrace()
    budget = DEFAULT_MAX_EVALS if config.max_evals is None else config.max_evals
    fun = _Budgeted(objective, budget, callback, trace)
    try:
        body(fun, np.array(theta0, dtype=np.float64).ravel(), config)
        trace.termination = "converged"
    except _Stop as stop:
        trace.termination = stop.reason
    if trace.best_theta is None and trace.thetas:
        trace.best_theta = trace.thetas[-1]
    return trace


# COBYLA simplex acceptability constants (Powell 1994): a vertex must lie
# within PARETA * rho of the base and at least PARSIG * rho from the face
# opposite to it; geometry steps have length GAMMA * rho.
PARSIG = 0.25
PARETA = 2.1
GAMMA = 0.5
RATIO_SHRINK = 0.1


def _cobyla(fun: _Budgeted, x0: np.ndarray, cfg: OptimizerConfig) -> None:
    n = x0.size
    rho = cfg.initial_trust_radius
    rhoend = cfg.final_trust_radius

    base = x0.copy()
    fbase = fun(base)
    sim = np.eye(n) * rho  # rows: vertex offsets from base
    fv = np.empty(n)
    for j in range(n):
        fv[j] = fun(base + sim[j])
        if fv[j] < fbase:
            # move the base to the better vertex, reflecting the others' offsets
            base = base + sim[j]
            fbase, fv[j] = fv[j], fbase
            sim[: j + 1] -= sim[j].copy()
            sim[j] = -rho * np.eye(n)[j]

    poor_step = False
    while True:
        # keep the best point as the simplex base
        jbest = int(np.argmin(fv))
        if fv[jbest] < fbase:
            shift = sim[jbest].copy()
            base = base + shift
            sim -= shift
            sim[jbest] = -shift
            fbase, fv[jbest] = fv[jbest], fbase

        simi = np.linalg.inv(sim)  # columns: dual directions
        grad = simi @ (fv - fbase)

        veta = np.sqrt(np.sum(sim * sim, axis=1))
        vsig = 1.0 / np.sqrt(np.sum(simi * simi, axis=0))
        acceptable = bool(np.all(veta <= PARETA * rho) and np.all(vsig >= PARSIG * rho))

        if poor_step or not acceptable:
            poor_step = False
            if not acceptable:
                far = veta > PARETA * rho
                j = int(np.argmax(veta)) if np.any(far) else int(np.argmin(vsig))
                direction = simi[:, j] * vsig[j]  # unit normal of the opposite face
                step = GAMMA * rho * direction
                if grad @ step > 0:
                    step = -step
                fnew = fun(base + step)
                sim[j] = step
                fv[j] = fnew
                continue
            if rho <= rhoend:
                return
            rho *= 0.5
            if rho <= 1.5 * rhoend:
                rho = rhoend
            continue

        gnorm = float(np.linalg.norm(grad))
        if gnorm == 0.0:
            poor_step = True
            continue
        step = -rho * grad / gnorm
        predicted = rho * gnorm
        fnew = fun(base + step)
        ratio = (fbase - fnew) / predicted

        # barycentric weights of the new point w.r.t. the simplex vertices
        lam = step @ simi
        weights = np.empty(n + 1)
        weights[:n] = np.abs(lam)
        weights[n] = abs(1.0 - lam.sum())
        if fnew < fbase:
            pts = np.vstack([sim, np.zeros(n)])
            dist = np.sqrt(np.sum((pts - step) ** 2, axis=1))
            score = weights * np.maximum(1.0, dist / rho) ** 2
            l = int(np.argmax(score))
            if l == n:
                # old base dropped; re-express the vertices relative to the new point
                sim = sim - step
                base = base + step
                fbase = fnew
            else:
                # the loop head promotes this vertex to base
                sim[l] = step
                fv[l] = fnew
        else:
            dist = veta
            score = weights[:n] * np.maximum(1.0, dist / rho) ** 2
            l = int(np.argmax(score))
            if score[l] > 1.0:
                sim[l] = step
                fv[l] = fnew
        if ratio <= RATIO_SHRINK:
            poor_step = True


def minimize_cobyla(objective: Callable, theta0, config: OptimizerConfig, callback=None) -> OptimizationTrace:
    """Minimize ``objective`` with a linear-model trust-region simplex method.

    The model is the linear interpolant on ``n + 1`` points; each trust step
    moves ``rho`` along its steepest descent. ``rho`` is halved after a poor
    step on an acceptable simplex and the run converges once it reaches
    ``final_trust_radius``.
    """
    return _run(_cobyla, objective, theta0, config, callback)


AMPLITUDE_FLOOR = 1e-12


def wrap_angle(x: float) -> float:
    """Map to (-pi, pi]."""
    return math.pi - (math.pi - x) % (2.0 * math.pi)


def sinusoid_minimizer(f0: float, fplus: float, fminus: float) -> tuple[float, float] | None:
    """Offset and amplitude of a + R cos(u - phi) sampled at u = 0, +pi/2, -pi/2.

    Returns (argmin offset, amplitude), or None when the amplitude vanishes.
    """
    a = 0.5 * (fplus + fminus)
    c = 0.5 * (fplus - fminus)
    b = f0 - a
    amp = math.hypot(b, c)
    if amp < AMPLITUDE_FLOOR:
        return None
    return math.atan2(c, b) + math.pi, amp


def _nft(fun: _Budgeted, x0: np.ndarray, cfg: OptimizerConfig) -> None:
    theta = x0.copy()
    d = theta.size
    rng = np.random.default_rng(cfg.seed)
    half = 0.5 * math.pi
    while True:
        order = rng.permutation(d) if cfg.nft_sweep_order == "random" else range(d)
        for j in order:
            if fun.remaining < 3:
                if fun.remaining > 0:
                    fun(theta)  # score the last fitted point
                raise _Stop("budget_exhausted")
            t = theta[j]
            f0 = fun(theta)
            theta[j] = t + half
            fp = fun(theta)
            theta[j] = t - half
            fm = fun(theta)
            fit = sinusoid_minimizer(f0, fp, fm)
            theta[j] = t if fit is None else wrap_angle(t + fit[0])


def minimize_nft(objective: Callable, theta0, config: OptimizerConfig, callback=None) -> OptimizationTrace:
    """Sequential one-parameter minimization assuming 2*pi-periodic sinusoids.

    Each update evaluates the current point and its +-pi/2 shifts, fits
    ``c0 + c1 cos(theta - phi)`` exactly and jumps to the fitted minimum.
    The anchor is re-evaluated every update so noisy objectives never reuse
    stale values. Runs until the budget (or callback) stops it.
    """
    return _run(_nft, objective, theta0, config, callback)


def minimize(objective: Callable, theta0, config: OptimizerConfig, callback=None) -> OptimizationTrace:
    if config.method == "cobyla":
        return minimize_cobyla(objective, theta0, config, callback)
    return minimize_nft(objective, theta0, config, callback)
