import itertools
import json
import math

import numpy as np
import pytest

from vqefactor.cvar import CvarEvaluator
from vqefactor.hamiltonian import CostFunction, eigenvalue_table
from vqefactor.instance import enumerate_instances, make_benchmark_instance, make_instance, solution_labels
from vqefactor.optimize import OptimizerConfig
from vqefactor.simulator import AnsatzSpec, exact_energy, fidelity, prepare_state, probabilities
from vqefactor.vqe import RunConfig, run_vqe, run_with_alpha_schedule, success_probability


def config(n, *, L=2, family="linear_cnot", **kw):
    inst = kw.pop("instance", None) or make_benchmark_instance(n)
    return RunConfig(instance=inst, ansatz=AnsatzSpec(family, inst.N, L), **kw)


def test_toy_grid_optimum_has_full_fidelity(nine_toy):
    spec = AnsatzSpec("linear_cnot", 2, 1)
    ev = CvarEvaluator(eigenvalue_table(nine_toy))
    grid = np.linspace(-np.pi, np.pi, 121)
    best = min(
        (ev.exact(probabilities(prepare_state(spec, [a, b])), 0.1), a, b) for a, b in itertools.product(grid, grid)
    )
    state = prepare_state(spec, best[1:])
    assert best[0] == pytest.approx(0.0, abs=1e-12)
    assert fidelity(state, nine_toy) == pytest.approx(1.0, abs=1e-12)


def test_toy_runs_succeed(nine_toy):
    wins = 0
    for seed in range(20):
        rec = run_vqe(config(9, instance=nine_toy, L=1, alpha=0.1, fidelity_threshold=0.01, seed=seed))
        wins += rec.success
        # CVaR at alpha is already 0 once the solution holds mass alpha, so the
        # optimizer has no reason to push fidelity further than that
        assert rec.max_fidelity >= 0.1 - 1e-6
    assert wins >= 18


def test_initial_success_is_eval_one():
    inst = make_benchmark_instance(15)
    # RY(pi) on qubits 0 and 1 prepares the solution label "110"
    rec = run_vqe(config(15, instance=inst, L=1, initial_params=[np.pi, np.pi, 0.0]))
    assert rec.success and rec.first_success_eval == 1
    assert rec.fidelity_trajectory[0] == pytest.approx(1.0)


def test_exact_alpha_one_equals_energy():
    rng = np.random.default_rng(0)
    for n in (15, 57, 123):
        inst = make_benchmark_instance(n)
        spec = AnsatzSpec("linear_cnot", inst.N, 3)
        ev = CvarEvaluator(eigenvalue_table(inst))
        for _ in range(34):
            state = prepare_state(spec, rng.uniform(-np.pi, np.pi, spec.parameter_count))
            assert ev.exact(probabilities(state), 1.0) == pytest.approx(exact_energy(state, inst), rel=1e-12)
    rec = run_vqe(config(57, alpha=1.0, optimizer=OptimizerConfig(max_evals=10)))
    for theta, value, _ in rec.trace.evaluations:
        assert value == pytest.approx(exact_energy(prepare_state(rec.config.ansatz, theta), rec.config.instance), rel=1e-12)


def test_running_max_and_first_success():
    rec = run_vqe(config(57, L=3, alpha=0.05, fidelity_threshold=0.2, seed=3))
    run_max = rec.running_max_fidelity()
    assert all(b >= a for a, b in zip(run_max, run_max[1:]))
    assert rec.max_fidelity == run_max[-1]
    if rec.success:
        i = rec.first_success_eval
        assert rec.fidelity_trajectory[i - 1] > 0.2
        assert all(f <= 0.2 for f in rec.fidelity_trajectory[: i - 1])
    assert rec.success == (rec.max_fidelity > 0.2)


@pytest.mark.parametrize("n,L", [(15, 2), (57, 3), (123, 2)])
@pytest.mark.parametrize("method", ["cobyla", "nft"])
def test_default_budget(n, L, method):
    rec = run_vqe(config(n, L=L, optimizer=OptimizerConfig(method), shots=200 if method == "nft" else None))
    N = rec.config.instance.N
    assert rec.config.max_evals == 50 * N * L
    assert rec.trace.n_evals <= 50 * N * L


def test_sampled_mode_reproducible_and_consistent():
    cfg = config(57, L=2, shots=300, alpha=0.1, seed=11, optimizer=OptimizerConfig("nft", max_evals=40))
    a, b = run_vqe(cfg), run_vqe(cfg)
    assert a.trace.values == b.trace.values
    assert a.fidelity_trajectory == b.fidelity_trajectory
    assert json.dumps(a.to_json()) == json.dumps(b.to_json())
    assert a.success == any(h > 0 for h in a.fidelity_trajectory)
    assert len(a.shadow_fidelity) == a.trace.n_evals == len(a.std_error_trajectory)
    if a.first_threshold_eval is not None:
        assert a.shadow_fidelity[a.first_threshold_eval - 1] > cfg.fidelity_threshold


def test_seed_changes_run():
    a = run_vqe(config(57, shots=100, optimizer=OptimizerConfig(max_evals=5), seed=1))
    b = run_vqe(config(57, shots=100, optimizer=OptimizerConfig(max_evals=5), seed=2))
    assert not np.array_equal(a.initial_theta, b.initial_theta)


def test_stop_on_success():
    rec = run_vqe(config(15, L=3, alpha=0.01, stop_on_success=True, seed=0))
    assert rec.success
    assert rec.trace.n_evals == rec.first_success_eval
    assert rec.trace.termination == "callback_stop"


def test_alpha_schedule_single():
    recs = run_with_alpha_schedule(config(15, L=4, alpha=0.5, alpha_schedule=(0.5,)))
    assert len(recs) == 1 and recs[0].success


def test_alpha_schedule_falls_through():
    # an unreachable first stage (one evaluation at theta=0) forces the second stage
    inst = make_benchmark_instance(57)
    cfg = config(57, instance=inst, L=3, initial_params="zeros", alpha_schedule=(0.5, 0.25), optimizer=OptimizerConfig(max_evals=1))
    recs = run_with_alpha_schedule(cfg)
    assert [r.config.alpha for r in recs] == [0.5, 0.25]
    assert not recs[0].success


def test_alpha_schedule_empty_rejected():
    with pytest.raises(ValueError):
        run_with_alpha_schedule(config(15, alpha_schedule=()))


def test_config_validation():
    inst = make_benchmark_instance(15)
    with pytest.raises(ValueError):
        RunConfig(inst, AnsatzSpec("linear_cnot", 4, 2))
    with pytest.raises(ValueError):
        RunConfig(inst, AnsatzSpec("linear_cnot", 3, 2), fidelity_threshold=1.0)
    with pytest.raises(ValueError):
        RunConfig(inst, AnsatzSpec("linear_cnot", 3, 2), alpha=0.0)
    with pytest.raises(ValueError):
        RunConfig(make_instance(15), AnsatzSpec("linear_cnot", 3, 2))
    with pytest.raises(ValueError):
        RunConfig(inst, AnsatzSpec("linear_cnot", 3, 2), initial_params=[0.0]).initial_theta()


def test_initial_theta_range():
    theta = config(253, L=3, seed=5).initial_theta()
    assert theta.shape == (27,)
    assert np.all(np.abs(theta) < math.pi)


def test_cost_kinds_run():
    for kind in ("hamiltonian", "logarithm", "inverse"):
        rec = run_vqe(config(57, cost=CostFunction(kind), shots=500, optimizer=OptimizerConfig("nft", max_evals=30)))
        assert rec.trace.n_evals == 30


def test_record_json_roundtrip():
    rec = run_vqe(config(15, optimizer=OptimizerConfig(max_evals=12)))
    data = json.loads(json.dumps(rec.to_json()))
    assert data["config"]["instance"]["n"] == 15
    assert data["config"]["optimizer"]["max_evals"] == 12
    assert data["n_evals"] == len(data["cost_trajectory"]) == 12
    assert "wall_time" not in data
    assert "wall_time" in rec.to_json(include_timing=True)


@pytest.mark.parametrize("N", [5, 6, 8, 9])
def test_degenerate_label_count(N):
    for inst in enumerate_instances(N):
        assert len(solution_labels(inst)) == (2 if inst.degenerate else 1)


@pytest.mark.parametrize(
    "t,S,expected",
    [(0.5, 1, 0.5), (1.0, 7, 1.0), (0.0, 10, 0.0), (0.01, 1000, 1 - 0.99**1000)],
)
def test_success_probability(t, S, expected):
    assert success_probability(t, S) == pytest.approx(expected, rel=1e-15, abs=0)


def test_success_probability_value():
    assert round(success_probability(0.01, 1000), 6) == 0.999957
    with pytest.raises(ValueError):
        success_probability(1.5, 10)
    with pytest.raises(ValueError):
        success_probability(0.5, 0)
