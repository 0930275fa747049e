import numpy as np
import pytest

from cwtoolkit.errors import CombinatorialBlowup, InfeasibleAllocation
from cwtoolkit.strategic import (Allocation, ContestSpec, StrategicGame, allocation_count,
                                 contest_value, enumerate_allocations, payoff_matrix,
                                 solve_strategic, strategic_payoff)
from cwtoolkit.technical import TechLevel

WTA = ContestSpec(kind="winner_take_all")
LOTTERY = ContestSpec()


def blotto(budget_d, budget_a, n_ops, contest=WTA, weights=None, **kw):
    ops = tuple("field%d" % j for j in range(n_ops))
    weights = np.full(n_ops, 1.0 / n_ops) if weights is None else weights
    return StrategicGame(ops, weights, budget_d, budget_a, [contest] * n_ops, **kw)


def test_contest_values():
    assert contest_value(WTA, 2, 1) == 1.0
    assert contest_value(WTA, 1, 1) == 0.5
    assert contest_value(WTA, 0, 1) == 0.0
    assert contest_value(LOTTERY, 1, 1) == 0.5
    assert contest_value(LOTTERY, 0, 0) == 0.5
    assert contest_value(ContestSpec(sharpness=2.0), 2, 1) == pytest.approx(0.8)
    assert contest_value(LOTTERY, 2, 1, TechLevel(contest_sharpness=2.0)) == pytest.approx(0.8)
    assert contest_value(LOTTERY, np.array([1.0, 3.0]), 1.0) == pytest.approx([0.5, 0.75])
    with pytest.raises(ValueError):
        contest_value(LOTTERY, -1, 1)


def test_enumerate_allocations():
    rows = enumerate_allocations(3, 1.0, 2)
    assert rows.tolist() == [[0, 3], [1, 2], [2, 1], [3, 0]]
    assert enumerate_allocations(3, 1.0, 2, allow_slack=True).shape == (10, 2)
    assert allocation_count(3, 2, allow_slack=True) == 10
    assert enumerate_allocations(1, 0.5, 2).tolist() == [[0, 1], [0.5, 0.5], [1, 0]]
    with pytest.raises(CombinatorialBlowup):
        enumerate_allocations(61, 1.0, 2)


def test_symmetric_blotto_value():
    for n_ops in (1, 2, 3):
        for budget in range(1, 6):
            for contest in (WTA, LOTTERY):
                eq = solve_strategic(blotto(budget, budget, n_ops, contest))
                assert eq.value_d == pytest.approx(0.5, abs=1e-9)
                assert eq.value_a == pytest.approx(0.5, abs=1e-9)


def test_exact_equilibria_are_unexploitable(rng):
    for n_ops in (2, 3):
        for budget_d in range(1, 6):
            for budget_a in range(1, 6):
                w = rng.dirichlet(np.ones(n_ops))
                game = blotto(budget_d, budget_a, n_ops, WTA, w)
                eq = solve_strategic(game)
                M = payoff_matrix(game, eq.allocations_d, eq.allocations_a)
                x, y = eq.strategy_d.weights, eq.strategy_a.weights
                assert (M @ y).max() - x @ M @ y <= 1e-8
                assert x @ M @ y - (x @ M).min() <= 1e-8
                assert eq.exploitability <= 1e-8


def test_mean_allocation_spends_budget():
    eq = solve_strategic(blotto(4, 3, 3, LOTTERY))
    assert eq.mean_allocation_d.sum() == pytest.approx(4.0)
    assert eq.mean_allocation_a.sum() == pytest.approx(3.0)
    assert eq.op_values @ eq.game.weights == pytest.approx(eq.value_d)


def test_feedback_override():
    game = StrategicGame(("op",), [1.0], 1.0, 1.0, [LOTTERY], feedback={"op": (0.3, 0.5)})
    assert solve_strategic(game).value_d == pytest.approx(0.3)

    # the override saturates at one
    game = StrategicGame(("op",), [1.0], 2.0, 1.0, [LOTTERY], feedback={"op": (0.9, 0.5)})
    assert solve_strategic(game).value_d == pytest.approx(1.0)

    game = StrategicGame(("op",), [1.0], 1.0, 1.0, [LOTTERY], feedback={"op": (0.7, 0.0)})
    assert solve_strategic(game).value_d == pytest.approx(0.7)


def test_strategic_payoff():
    game = blotto(2, 2, 2)
    assert strategic_payoff(game, [2, 0], [1, 1]) == (0.5, 0.5)
    alloc = Allocation({"field0": 1.0, "field1": 1.0})
    assert alloc.total == 2.0
    assert strategic_payoff(game, alloc, Allocation.from_row(game.operations, [0, 2])) == \
        (0.5, 0.5)
    with pytest.raises(InfeasibleAllocation):
        strategic_payoff(game, [2, 1], [1, 1])
    with pytest.raises(InfeasibleAllocation):
        strategic_payoff(game, [1.5, 0.5], [1, 1])


def test_game_validation():
    with pytest.raises(ValueError):
        blotto(2.5, 2, 2)
    with pytest.raises(ValueError):
        blotto(2, 2, 2, weights=[0.7, 0.7])
    with pytest.raises(ValueError):
        solve_strategic(blotto(2, 2, 2), method="simulated_annealing")


def test_fictitious_play_method():
    exact = solve_strategic(blotto(3, 3, 2))
    approx = solve_strategic(blotto(3, 3, 2), method="fictitious_play", iterations=10000)
    assert approx.value_d == pytest.approx(exact.value_d, abs=0.05)


def test_one_more_unit_never_hurts_the_defender(rng):
    for n_ops in (2, 3):
        w = rng.dirichlet(np.ones(n_ops))
        for contest in (WTA, LOTTERY):
            for budget_a in range(1, 4):
                values = [solve_strategic(blotto(b, budget_a, n_ops, contest, w)).value_d
                          for b in range(0, 6)]
                for lower, higher in zip(values, values[1:]):
                    assert higher >= lower - 1e-9


def test_swapping_budgets_mirrors_the_value(rng):
    for n_ops in (2, 3):
        w = rng.dirichlet(np.ones(n_ops))
        for contest in (WTA, ContestSpec(sharpness=1.5)):
            for budget_d, budget_a in ((1, 3), (2, 4), (4, 3)):
                v = solve_strategic(blotto(budget_d, budget_a, n_ops, contest, w)).value_d
                mirrored = solve_strategic(blotto(budget_a, budget_d, n_ops, contest, w)).value_d
                assert mirrored == pytest.approx(1.0 - v, abs=1e-9)


def test_covered_fields_and_the_heaviest_target(rng):
    for n_ops in (2, 3, 4):
        w = rng.dirichlet(np.ones(n_ops))
        # defender outbids every attacker allocation on every field
        budget_a = 2
        eq = solve_strategic(blotto(n_ops * (budget_a + 1), budget_a, n_ops, WTA, w))
        assert eq.value_d == pytest.approx(w.sum())
        # nothing committed: the attacker takes the heaviest field
        eq = solve_strategic(blotto(0, 1, n_ops, WTA, w))
        assert eq.value_d == pytest.approx(1.0 - w.max())
