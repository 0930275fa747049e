import numpy as np
import pytest

from cwtoolkit.errors import ShapeMismatch, TooManyPlayers
from cwtoolkit.policy import (BudgetRule, CoalitionGame, PolicyOutcome, _shapley_coefficients,
                              _shapley_permutations, core_membership, policy_equilibrium,
                              shapley_value)
from cwtoolkit.technical import TechLevel


def glove_game():
    # player 0 owns a left glove, players 1 and 2 a right glove each
    return CoalitionGame.from_function(3, lambda S: float(0 in S and (1 in S or 2 in S)))


def random_game(rng, n):
    v = rng.uniform(-1, 2, size=2 ** n)
    v[0] = 0.0
    return CoalitionGame(n, v)


def test_glove_game():
    assert shapley_value(glove_game()).shares == pytest.approx([2 / 3, 1 / 6, 1 / 6])


def test_efficiency_and_additivity(rng):
    for _ in range(100):
        n = int(rng.integers(1, 7))
        g1, g2 = random_game(rng, n), random_game(rng, n)
        phi1, phi2 = shapley_value(g1).shares, shapley_value(g2).shares
        assert phi1.sum() == pytest.approx(g1.v[-1])
        phi12 = shapley_value(CoalitionGame(n, g1.v + g2.v)).shares
        assert phi12 == pytest.approx(phi1 + phi2)


def test_symmetry(rng):
    for _ in range(100):
        n = int(rng.integers(2, 7))
        table = {}

        def v(S):
            # players 0 and 1 are interchangeable
            key = ((0 in S) + (1 in S), tuple(i for i in S if i > 1))
            if key not in table:
                table[key] = float(rng.uniform(-1, 2))
            return table[key]

        phi = shapley_value(CoalitionGame.from_function(n, v)).shares
        assert phi[0] == pytest.approx(phi[1])


def test_dummy_player(rng):
    for _ in range(100):
        n = int(rng.integers(2, 7))
        c = float(rng.uniform(-1, 1))
        base = {}

        def v(S):
            rest = tuple(i for i in S if i != n - 1)
            if rest not in base:
                base[rest] = float(rng.uniform(-1, 2)) if rest else 0.0
            return base[rest] + (c if n - 1 in S else 0.0)

        assert shapley_value(CoalitionGame.from_function(n, v))[n - 1] == pytest.approx(c)


def test_permutation_and_coefficient_forms_agree(rng):
    for n in range(1, 7):
        game = random_game(rng, n)
        assert _shapley_coefficients(game) == pytest.approx(_shapley_permutations(game))


def test_larger_games_use_coefficients(rng):
    game = random_game(rng, 10)
    assert shapley_value(game).shares.sum() == pytest.approx(game.v[-1])


def test_player_cap():
    with pytest.raises(TooManyPlayers):
        CoalitionGame(17, np.zeros(1))


def test_empty_coalition_must_be_zero():
    with pytest.raises(ValueError):
        CoalitionGame(1, [0.5, 1.0])
    with pytest.raises(ShapeMismatch):
        CoalitionGame(2, [0.0, 1.0])


def test_from_rules():
    game = CoalitionGame.from_rules(2, standalone=[1.0, 2.0], synergy=[((0, 1), 0.5)])
    assert list(game.v) == [0.0, 1.0, 2.0, 3.5]
    game = CoalitionGame.from_rules(2, standalone=[1.0, 2.0], overrides={(0, 1): 10.0})
    assert game.value((0, 1)) == 10.0
    assert game.with_value((0,), 4.0).value((0,)) == 4.0


def test_core_membership():
    game = glove_game()
    assert core_membership(game, [1.0, 0.0, 0.0]).in_core

    verdict = core_membership(game, shapley_value(game))
    assert not verdict.in_core
    assert verdict.coalition in ((0, 1), (0, 2))
    assert verdict.excess == pytest.approx(1 / 6)

    verdict = core_membership(game, [0.5, 0.0, 0.0])
    assert verdict.coalition == (0, 1, 2)
    assert verdict.excess == pytest.approx(0.5)

    with pytest.raises(ShapeMismatch):
        core_membership(game, [1.0, 0.0])


def test_policy_equilibrium_budget():
    out = policy_equilibrium(glove_game(), 0, [0.5, 0.5], BudgetRule(base=1.0, scale=3.0),
                             TechLevel(budget_multiplier=2.0), ("recon", "strike"))
    assert out.budget == pytest.approx(1.0 + 3.0 * (2 / 3) * 2.0)
    assert out.weight("strike") == 0.5

    clipped = policy_equilibrium(glove_game(), 0, [1.0], BudgetRule(base=-10.0), TechLevel())
    assert clipped.budget == 0.0
    assert clipped.operations == ("op0",)

    with pytest.raises(ValueError):
        policy_equilibrium(glove_game(), 3, [1.0], BudgetRule(), TechLevel())


def test_policy_outcome_validation():
    with pytest.raises(ValueError):
        PolicyOutcome(("a", "b"), [0.7, 0.7], 1.0)
    with pytest.raises(ValueError):
        PolicyOutcome(("a",), [1.0], -1.0)
    with pytest.raises(ShapeMismatch):
        PolicyOutcome(("a", "b"), [1.0], 1.0)


def test_budget_grows_with_the_defenders_coalitions(rng):
    rule = BudgetRule(base=0.5, scale=2.0)
    for n in (2, 3, 4):
        for _ in range(20):
            game = random_game(rng, n)
            i = int(rng.integers(n))
            v = game.v.copy()
            v[[S for S in range(2 ** n) if S & (1 << i)]] += rng.uniform(0.0, 1.0)
            before = policy_equilibrium(game, i, [1.0], rule, TechLevel()).budget
            after = policy_equilibrium(CoalitionGame(n, v), i, [1.0], rule, TechLevel()).budget
            assert after >= before - 1e-12
