from dataclasses import replace
from itertools import product

import numpy as np
import pytest
from scipy.optimize import linprog

from cwtoolkit.errors import IndexOutOfRange, NonStochasticRow, ShapeMismatch
from cwtoolkit.operational import (StochasticGameSpec, evaluate_policies, simulate,
                                   simulate_batch, solve_operational, stage_matrices,
                                   stage_payoff, trajectories_to_arrays, verify_operational)


def random_spec(rng, horizon=2, n_states=2, n_d=2, n_a=2, **kw):
    T = rng.dirichlet(np.ones(n_states), size=(n_states, n_d, n_a))
    return StochasticGameSpec(
        states=tuple("s%d" % i for i in range(n_states)),
        actions_d=tuple("d%d" % i for i in range(n_d)),
        actions_a=tuple("a%d" % i for i in range(n_a)),
        horizon=horizon,
        transition=T,
        stage_payoff_state=rng.normal(size=n_states),
        stage_payoff_context=float(rng.normal()),
        tactical_term=rng.normal(size=(n_d, n_a, 2)),
        **kw)


def lp_value(A):
    m, n = A.shape
    c = np.zeros(m + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=np.hstack([-A.T, np.ones((n, 1))]), b_ub=np.zeros(n),
                  A_eq=np.concatenate([np.ones(m), [0.0]])[None, :], b_eq=[1.0],
                  bounds=[(0, None)] * m + [(None, None)], method="highs")
    return -res.fun


def lp_backward_induction(spec):
    R_d, _ = stage_matrices(spec)
    V = np.zeros(len(spec.states))
    for _ in range(spec.horizon):
        cont = spec.transition @ V
        V = np.array([lp_value(R_d[s] + cont[s]) for s in range(len(spec.states))])
    return V


def deterministic_policies(K, S, A):
    for choice in product(range(A), repeat=K * S):
        probs = np.zeros((K, S, A))
        for idx, a in enumerate(choice):
            probs[idx // S, idx % S, a] = 1.0
        yield probs


def test_backward_induction_matches_lp_oracle(rng):
    for _ in range(50):
        spec = random_spec(rng)
        sol = solve_operational(spec)
        assert sol.value[0] == pytest.approx(lp_backward_induction(spec), abs=1e-7)
        assert np.all(sol.value[-1] == 0.0)
        assert sol.cumulative_value_d == sol.value_at(1, spec.initial_state)
        assert sol.cumulative_value_a == pytest.approx(-sol.cumulative_value_d)
        assert verify_operational(spec, sol) <= 1e-9


def test_no_pure_deviation_improves(rng):
    for _ in range(10):
        spec = random_spec(rng)
        sol = solve_operational(spec)
        s0 = spec.initial_state
        V, _ = evaluate_policies(spec, sol.policy_d.probs, sol.policy_a.probs)
        assert V[0, s0] == pytest.approx(sol.cumulative_value_d, abs=1e-9)
        for probs in deterministic_policies(2, 2, 2):
            V_dev, _ = evaluate_policies(spec, sol.policy_d.probs, probs)
            assert V_dev[0, s0] >= sol.cumulative_value_d - 1e-9
            V_dev, _ = evaluate_policies(spec, probs, sol.policy_a.probs)
            assert V_dev[0, s0] <= sol.cumulative_value_d + 1e-9


def test_general_sum_stage_games(rng):
    spec = random_spec(rng, horizon=3, n_states=3, general_sum=True)
    R_d, R_a = stage_matrices(spec)
    assert R_a[0] == pytest.approx(spec.tactical_term[:, :, 1] - spec.stage_payoff_state[0]
                                   - spec.stage_payoff_context)
    sol = solve_operational(spec)
    V, Va = evaluate_policies(spec, sol.policy_d.probs, sol.policy_a.probs)
    assert V[0] == pytest.approx(sol.value[0], abs=1e-9)
    assert Va[0] == pytest.approx(sol.value_a[0], abs=1e-9)
    assert verify_operational(spec, sol) <= 1e-9


def test_stage_payoff_decomposition():
    spec = StochasticGameSpec(("s",), ("d",), ("a",), 1, np.ones((1, 1, 1, 1)), [0.5],
                              stage_payoff_context=0.25, tactical_term=[[[1.0, -1.0]]])
    assert stage_payoff(spec, 0, 0, 0) == pytest.approx(1.75)
    with pytest.raises(IndexOutOfRange):
        stage_payoff(spec, 1, 0, 0)


def test_value_grows_with_horizon_when_payoffs_are_nonnegative(rng):
    for _ in range(20):
        base = random_spec(rng, horizon=1, n_states=3)
        term = np.abs(base.tactical_term)
        values = []
        for K in range(1, 6):
            spec = replace(base, horizon=K, tactical_term=term,
                           stage_payoff_state=np.abs(base.stage_payoff_state),
                           stage_payoff_context=abs(base.stage_payoff_context))
            values.append(solve_operational(spec).value[0])
        for shorter, longer in zip(values, values[1:]):
            assert np.all(longer >= shorter - 1e-9)


def test_context_term_shifts_value_linearly(rng):
    for _ in range(20):
        spec = random_spec(rng, horizon=int(rng.integers(1, 5)), n_states=2)
        base = solve_operational(replace(spec, stage_payoff_context=0.0)).value[0]
        for c in (-1.5, 0.3, 2.0):
            shifted = solve_operational(replace(spec, stage_payoff_context=c)).value[0]
            assert shifted == pytest.approx(base + c * spec.horizon, abs=1e-9)


def test_spec_validation():
    T = np.full((1, 1, 1, 2), 0.45)
    with pytest.raises(NonStochasticRow):
        StochasticGameSpec(("s0", "s1"), ("d",), ("a",), 1,
                           np.concatenate([T, T]), [0.0, 0.0])
    with pytest.raises(ShapeMismatch):
        StochasticGameSpec(("s",), ("d",), ("a",), 1, np.ones((1, 1, 1)), [0.0])
    with pytest.raises(ValueError):
        StochasticGameSpec(("s",), ("d",), ("a",), 0, np.ones((1, 1, 1, 1)), [0.0])
    with pytest.raises(IndexOutOfRange):
        StochasticGameSpec(("s",), ("d",), ("a",), 1, np.ones((1, 1, 1, 1)), [0.0],
                           initial_state=3)


def test_simulation_is_seeded(rng):
    spec = random_spec(rng, horizon=4, n_states=3)
    sol = solve_operational(spec)
    t1, t2 = simulate(spec, sol, 42), simulate(spec, sol, 42)
    assert np.array_equal(t1.states, t2.states)
    assert np.array_equal(t1.payoffs, t2.payoffs)
    assert t1.states[0] == spec.initial_state
    assert t1.cumulative == pytest.approx(t1.payoffs.sum())

    trajs = simulate_batch(spec, sol, range(5))
    arrays = trajectories_to_arrays(trajs)
    assert arrays["state"].shape == (5, 4)
    assert arrays["cumulative"].shape == (5,)
    assert np.array_equal(arrays["payoff"][0], simulate(spec, sol, 0).payoffs)


def test_simulation_rejects_foreign_solution(rng):
    sol = solve_operational(random_spec(rng, horizon=2))
    with pytest.raises(ShapeMismatch):
        simulate(random_spec(rng, horizon=3), sol, 0)


def test_mean_of_trajectories_approaches_value(rng):
    spec = random_spec(rng, horizon=3)
    sol = solve_operational(spec)
    arrays = trajectories_to_arrays(simulate_batch(spec, sol, range(4000)))
    stderr = arrays["cumulative"].std() / np.sqrt(4000)
    assert abs(arrays["cumulative"].mean() - sol.cumulative_value_d) <= 5 * stderr + 1e-9
