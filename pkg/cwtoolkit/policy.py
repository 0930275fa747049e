"""
Policy echelon: coalition games among allied players.

The characteristic function v is stored as a flat array indexed by
coalition bitmask (bit i set <=> player i in S). The Shapley value of
the defender feeds an affine budget rule that yields the policy outcome
(weights over operations, defender budget).

Example:
    game = CoalitionGame(3, v)           # v has 2**3 entries, v[0] == 0
    shapley_value(game).shares           # one share per player
    policy_equilibrium(game, 0, weights, BudgetRule(base=0, scale=3), TechLevel())

Notes:
    Permutation averaging is used up to PERMUTATION_LIMIT players; the
    coefficient formula (exact as well) covers the rest, up to MAX_PLAYERS.

"""
import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np
from pydantic import BaseModel, ConfigDict

from .errors import ShapeMismatch, TooManyPlayers

TOLERANCE = 1e-9
MAX_PLAYERS = 16
PERMUTATION_LIMIT = 8


def _members(mask, n):
    return tuple(i for i in range(n) if mask >> i & 1)


def _mask(members):
    mask = 0
    for i in members:
        mask |= 1 << i
    return mask


@dataclass(frozen=True)
class CoalitionGame:
    """Transferable-utility game on players 0..n-1."""

    n_players: int
    v: np.ndarray

    def __post_init__(self):
        if self.n_players > MAX_PLAYERS:
            raise TooManyPlayers("%d players (max %d)" % (self.n_players, MAX_PLAYERS))
        if self.n_players < 1:
            raise ValueError("coalition game needs at least one player")
        v = np.asarray(self.v, dtype=float)
        if v.shape != (2 ** self.n_players,):
            raise ShapeMismatch("v must have 2**n = %d entries" % 2 ** self.n_players)
        if abs(v[0]) > TOLERANCE:
            raise ValueError("v(empty set) must be 0")
        v = v.copy()
        v[0] = 0.0
        object.__setattr__(self, "v", v)

    @classmethod
    def from_function(cls, n, func):
        """Build v from a function of the member tuple."""
        return cls(n, [func(_members(mask, n)) if mask else 0.0 for mask in range(2 ** n)])

    @classmethod
    def from_rules(cls, n, standalone=None, synergy=(), overrides=None):
        """Additive standalone values plus bonuses, then explicit overrides.

        Args:
            standalone (sequence): value of each player acting alone.
            synergy (iterable): (members, bonus) pairs; the bonus is added to
                every coalition containing all members.
            overrides (dict): members tuple -> value, applied last.
        """
        c = np.zeros(n) if standalone is None else np.asarray(standalone, dtype=float)
        rules = [(_mask(m), b) for m, b in synergy]
        v = np.zeros(2 ** n)
        for mask in range(1, 2 ** n):
            v[mask] = c[list(_members(mask, n))].sum()
            v[mask] += sum(b for rmask, b in rules if mask & rmask == rmask)
        for members, value in (overrides or {}).items():
            v[_mask(members)] = value

        return cls(n, v)

    def value(self, members):
        return float(self.v[_mask(members)])

    def with_value(self, members, value):
        v = self.v.copy()
        v[_mask(members)] = value
        return CoalitionGame(self.n_players, v)


@dataclass(frozen=True)
class PayoffVector:
    shares: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "shares", np.asarray(self.shares, dtype=float))

    def __len__(self):
        return self.shares.size

    def __getitem__(self, i):
        return float(self.shares[i])


@dataclass(frozen=True)
class CoreVerdict:
    in_core: bool
    coalition: tuple = ()
    excess: float = 0.0


@dataclass(frozen=True)
class PolicyOutcome:
    """Objective weights over operations and the defender budget."""

    operations: tuple
    weights: np.ndarray
    budget: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.size != len(self.operations):
            raise ShapeMismatch("one weight per operation required")
        if np.any(w < -TOLERANCE) or abs(w.sum() - 1.0) > TOLERANCE:
            raise ValueError("policy weights %s are not on the simplex" % w)
        if self.budget < 0:
            raise ValueError("budget must be nonnegative")
        object.__setattr__(self, "weights", np.clip(w, 0.0, None))
        object.__setattr__(self, "operations", tuple(self.operations))

    def weight(self, op):
        return float(self.weights[self.operations.index(op)])


class BudgetRule(BaseModel):
    """budget = base + scale * shapley[defender] * theta.budget_multiplier"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    base: float = 0.0
    scale: float = 1.0


# --- Solution concepts --- #


def _shapley_permutations(game):
    n = game.n_players
    shares = np.zeros(n)
    count = 0
    for order in permutations(range(n)):
        mask = 0
        for i in order:
            shares[i] += game.v[mask | 1 << i] - game.v[mask]
            mask |= 1 << i
        count += 1

    return shares / count


def _shapley_coefficients(game):
    n = game.n_players
    masks = np.arange(2 ** n)
    sizes = np.array([bin(m).count("1") for m in masks])
    fact = np.array([math.factorial(k) for k in range(n + 1)], dtype=float)
    shares = np.zeros(n)
    for i in range(n):
        without = masks[(masks >> i & 1) == 0]
        s = sizes[without]
        coef = fact[s] * fact[n - s - 1] / fact[n]
        shares[i] = np.sum(coef * (game.v[without | 1 << i] - game.v[without]))

    return shares


def shapley_value(game):
    """Exact Shapley value of a coalition game."""
    if game.n_players > MAX_PLAYERS:
        raise TooManyPlayers("%d players (max %d)" % (game.n_players, MAX_PLAYERS))
    if game.n_players <= PERMUTATION_LIMIT:
        return PayoffVector(_shapley_permutations(game))

    return PayoffVector(_shapley_coefficients(game))


def core_membership(game, x):
    """Check x against efficiency and every coalition constraint.

    Returns:
        CoreVerdict; on failure `coalition` is a maximally violated one
        and `excess` = v(S) - x(S) (or |x(N) - v(N)| for efficiency).
    """
    x = x.shares if isinstance(x, PayoffVector) else np.asarray(x, dtype=float)
    n = game.n_players
    if x.size != n:
        raise ShapeMismatch("payoff vector length %d != %d players" % (x.size, n))

    grand = 2 ** n - 1
    gap = x.sum() - game.v[grand]
    if abs(gap) > TOLERANCE:
        return CoreVerdict(False, _members(grand, n), float(abs(gap)))

    masks = np.arange(1, 2 ** n)
    totals = np.array([x[list(_members(m, n))].sum() for m in masks])
    excess = game.v[masks] - totals
    worst = int(np.argmax(excess))
    if excess[worst] > TOLERANCE:
        return CoreVerdict(False, _members(int(masks[worst]), n), float(excess[worst]))

    return CoreVerdict(True)


def policy_equilibrium(game, defender_index, base_weights, budget_rule, theta,
                       operations=None):
    """Policy outcome (w*, B*) from the coalition game.

    The budget is affine in the defender's Shapley share and scaled by the
    technology level; negative results are clipped to zero.
    """
    if not 0 <= defender_index < game.n_players:
        raise ValueError("defender index %d out of range" % defender_index)

    share = shapley_value(game)[defender_index]
    budget = budget_rule.base + budget_rule.scale * share * theta.budget_multiplier
    weights = np.asarray(base_weights, dtype=float)
    if operations is None:
        operations = tuple("op%d" % i for i in range(weights.size))

    return PolicyOutcome(tuple(operations), weights, max(float(budget), 0.0))

