import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import cvar_by_sorting, cvar_of_distribution
from vqefactor.cvar import (
    CvarEvaluator,
    TailTooSmallError,
    cvar_exact,
    cvar_sampled,
    cvar_std_error,
    tail_size,
)
from vqefactor.hamiltonian import eigenvalue_table
from vqefactor.instance import make_benchmark_instance, solution_indices
from vqefactor.simulator import probabilities

alphas = st.floats(min_value=1e-3, max_value=1.0)
cost_lists = st.lists(st.integers(-1000, 1000), min_size=1, max_size=200)


def test_sampled_examples():
    assert cvar_sampled([0, 4, 4, 16], 0.5).value == 2.0
    assert cvar_sampled([16, 4, 0, 4], 1.0).value == 6.0
    for alpha in (0.01, 0.5, 1.0):
        est = cvar_sampled([7.5], alpha)
        assert est.value == 7.5 and est.tail_size == 1 and est.std_error is None


def test_sampled_rejects():
    with pytest.raises(ValueError):
        cvar_sampled([], 0.5)
    with pytest.raises(ValueError):
        cvar_sampled([1, 2], 0.0)
    with pytest.raises(ValueError):
        cvar_sampled([1, 2], 1.5)


def test_tail_size_rounding():
    assert tail_size(0.07, 100) == 7
    assert tail_size(0.1, 1000) == 100
    assert tail_size(0.01, 150) == 2
    assert tail_size(0.001, 10) == 1


def test_exact_examples(nine_toy, psi1, psi2):
    assert cvar_exact({0: 0.1, 64: 0.9}, 0.1).value == 0.0
    assert cvar_exact({36: 1.0}, 0.1).value == 36.0
    assert cvar_exact({0: 0.05, 64: 0.95}, 0.1).value == pytest.approx(32.0, abs=1e-12)
    ev = CvarEvaluator(eigenvalue_table(nine_toy))
    assert ev.exact(probabilities(psi1), 0.1) == pytest.approx(0.0, abs=1e-12)
    assert ev.exact(probabilities(psi2), 0.1) == pytest.approx(36.0, abs=1e-12)
    assert ev.exact(probabilities(psi1), 1.0) == pytest.approx(57.6, abs=1e-12)


def test_exact_rejects_unnormalized():
    with pytest.raises(ValueError):
        cvar_exact({0: 0.5, 1: 0.4}, 0.5)
    with pytest.raises(ValueError):
        cvar_exact({0: 1.2, 1: -0.2}, 0.5)


def test_std_error_examples():
    assert cvar_std_error([0, 4, 100, 200], 0.5) == pytest.approx(2.0, abs=1e-15)
    assert cvar_std_error([3, 3, 3, 9], 0.75) == 0.0
    with pytest.raises(TailTooSmallError):
        cvar_std_error([0, 4, 100, 200], 0.25)


def test_evaluator_matches_sorting_oracle():
    rng = np.random.default_rng(4)
    for _ in range(100):
        m = int(rng.integers(2, 64))
        costs = rng.integers(0, 30, m)
        ev = CvarEvaluator(costs)
        probs = rng.dirichlet(np.ones(m))
        S = int(rng.integers(1, 3000))
        counts = rng.multinomial(S, probs)
        alpha = float(rng.choice([0.01, 0.1, 0.25, 0.5, 0.75, 1.0, rng.uniform(0.001, 1)]))
        samples = np.repeat(costs, counts)
        est = ev.from_counts(counts, alpha)
        ref = cvar_sampled(samples, alpha)
        assert est.tail_size == ref.tail_size
        assert est.value == pytest.approx(cvar_by_sorting(samples, alpha), rel=1e-12, abs=1e-12)
        if ref.std_error is not None:
            assert est.std_error == pytest.approx(ref.std_error, rel=1e-9, abs=1e-12)
        assert ev.exact(probs, alpha) == pytest.approx(cvar_of_distribution(costs.astype(float), probs, alpha), rel=1e-10)


@settings(max_examples=200, deadline=None)
@given(cost_lists, alphas)
def test_cvar_never_exceeds_mean(costs, alpha):
    est = cvar_sampled(costs, alpha)
    assert est.value <= np.mean(costs) + 1e-9
    assert est.tail_size == max(1, math.ceil(round(alpha * len(costs), 9)))


@settings(max_examples=200, deadline=None)
@given(cost_lists)
def test_alpha_one_is_mean(costs):
    assert cvar_sampled(costs, 1.0).value == pytest.approx(np.mean(costs), rel=1e-12, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(-50, 50), st.floats(0.01, 1.0)), min_size=1, max_size=20), st.lists(alphas, min_size=2, max_size=6))
def test_exact_monotone_in_alpha(atoms, alpha_list):
    dist: dict = {}
    for v, w in atoms:
        dist[v] = dist.get(v, 0.0) + w
    total = sum(dist.values())
    dist = {v: w / total for v, w in dist.items()}
    values = [cvar_exact(dist, a).value for a in sorted(alpha_list)]
    assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))
    assert cvar_exact(dist, 1.0).value == pytest.approx(sum(v * w for v, w in dist.items()), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=4, max_size=200), st.floats(0.5, 1.0), st.floats(0.01, 100.0))
def test_scale_equivariance(costs, alpha, c):
    a = cvar_sampled(costs, alpha)
    b = cvar_sampled([c * x for x in costs], alpha)
    assert b.value == pytest.approx(c * a.value, rel=1e-9, abs=1e-9)
    assert b.std_error == pytest.approx(c * a.std_error, rel=1e-9, abs=1e-9)


def test_argmin_over_basis_states_is_ground_state():
    inst = make_benchmark_instance(57)
    table = eigenvalue_table(inst)
    ev = CvarEvaluator(table)
    for alpha in (0.01, 0.3, 1.0):
        scores = []
        for i in range(table.size):
            probs = np.zeros(table.size)
            probs[i] = 1.0
            scores.append(ev.exact(probs, alpha))
        assert int(np.argmin(scores)) in set(solution_indices(inst).tolist())


def test_distribution_groups_by_value(nine_toy, psi1):
    dist = CvarEvaluator(eigenvalue_table(nine_toy)).distribution(probabilities(psi1))
    assert dist[0] == pytest.approx(0.1) and dist[64] == pytest.approx(0.9)
    assert cvar_exact(dist, 0.1).value == pytest.approx(0.0, abs=1e-12)
