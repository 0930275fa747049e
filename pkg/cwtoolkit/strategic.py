"""
Strategic echelon: Blotto-like allocation of resources across operations.

Both sides split a budget over the operations (battlefields) on a fixed
grid. Each operation is won according to a contest function, and the
defender's payoff is the weight-averaged contest value, so the game is
zero-sum in shifted form (value_a = 1 - value_d). The discretized game is
solved exactly on its full normal form.

Example:
    game = StrategicGame(('recon', 'disrupt'), [0.5, 0.5], budget_d=3,
                         budget_a=3, contests=[ContestSpec(kind='winner_take_all')] * 2)
    eq = solve_strategic(game)          # eq.value_d == 0.5

Notes:
    Operational feedback (per-operation outcome f and anchor contest value)
    overrides a contest at the anchor and rescales it multiplicatively
    elsewhere: min(1, contest * f / anchor).

"""
import logging
from dataclasses import dataclass, field
from math import comb
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .errors import CombinatorialBlowup, InfeasibleAllocation, ShapeMismatch
from .kernel import MatrixGame, fictitious_play, solve_zero_sum
from .technical import TechLevel

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9
MAX_UNITS = 60
MAX_OPS = 6
MAX_PROFILES = 2_000_000
FP_ITERATIONS = 10000
METHODS = ("exact_lp", "fictitious_play")


class ContestSpec(BaseModel):
    """Contest function of one operation."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["lottery", "winner_take_all"] = "lottery"
    sharpness: float = Field(1.0, gt=0)


def contest_value(spec, r_d, r_a, theta=None):
    """Defender's share of one operation for commitments (r_d, r_a).

    Works elementwise on arrays (broadcasting r_d against r_a).
    """
    r_d = np.asarray(r_d, dtype=float)
    r_a = np.asarray(r_a, dtype=float)
    if np.any(r_d < 0) or np.any(r_a < 0):
        raise ValueError("resource commitments must be nonnegative")

    if spec.kind == "winner_take_all":
        out = np.where(r_d > r_a, 1.0, np.where(r_d < r_a, 0.0, 0.5))
    else:
        s = spec.sharpness * (theta.contest_sharpness if theta is not None else 1.0)
        num = r_d ** s
        den = num + r_a ** s
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.5)

    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Allocation:
    """Budget split: operation -> amount."""

    amounts: dict

    @classmethod
    def from_row(cls, operations, row):
        return cls({op: float(x) for op, x in zip(operations, row)})

    def as_array(self, operations):
        return np.array([self.amounts.get(op, 0.0) for op in operations], dtype=float)

    @property
    def total(self):
        return float(sum(self.amounts.values()))


@dataclass(frozen=True)
class StrategicGame:
    operations: tuple
    weights: np.ndarray
    budget_d: float
    budget_a: float
    contests: tuple
    grid_step: float = 1.0
    tech: TechLevel = field(default_factory=TechLevel)
    allow_slack: bool = False
    # operation -> (f, anchor) from the operational fold
    feedback: dict = field(default_factory=dict)

    def __post_init__(self):
        ops = tuple(self.operations)
        if len(ops) < 1:
            raise ValueError("strategic game needs at least one operation")
        w = np.asarray(self.weights, dtype=float)
        if w.size != len(ops):
            raise ShapeMismatch("one weight per operation required")
        if np.any(w < -TOLERANCE) or abs(w.sum() - 1.0) > TOLERANCE:
            raise ValueError("weights %s are not on the simplex" % w)
        contests = self.contests
        if isinstance(contests, dict):
            contests = [contests[op] for op in ops]
        contests = tuple(contests)
        if len(contests) != len(ops):
            raise ShapeMismatch("one contest per operation required")
        if self.grid_step <= 0:
            raise ValueError("grid_step must be positive")
        for name, budget in (("budget_d", self.budget_d), ("budget_a", self.budget_a)):
            units = budget / self.grid_step
            if budget < 0 or abs(units - round(units)) > TOLERANCE:
                raise ValueError("%s=%g is not a nonnegative multiple of grid_step %g"
                                 % (name, budget, self.grid_step))
        object.__setattr__(self, "operations", ops)
        object.__setattr__(self, "weights", np.clip(w, 0.0, None))
        object.__setattr__(self, "contests", contests)

    @property
    def n_ops(self):
        return len(self.operations)

    def effective_contest(self, j, r_d, r_a):
        """Contest value of operation j after operational feedback."""
        base = np.asarray(contest_value(self.contests[j], r_d, r_a, self.tech), dtype=float)
        op = self.operations[j]
        if op not in self.feedback:
            return base
        f, anchor = self.feedback[op]
        if anchor > TOLERANCE:
            return np.minimum(1.0, base * (f / anchor))

        return np.zeros_like(base) + f


@dataclass(frozen=True)
class StrategicEquilibrium:
    game: StrategicGame
    allocations_d: np.ndarray
    allocations_a: np.ndarray
    strategy_d: object
    strategy_a: object
    value_d: float
    value_a: float
    exploitability: float
    # expected effective contest value per operation
    op_values: np.ndarray

    @property
    def operations(self):
        return self.game.operations

    @property
    def grid_step(self):
        return self.game.grid_step

    @property
    def mean_allocation_d(self):
        return self.strategy_d.weights @ self.allocations_d

    @property
    def mean_allocation_a(self):
        return self.strategy_a.weights @ self.allocations_a


# --- Pure strategies --- #


def _compositions(units, parts, slack):
    if parts == 1:
        if slack:
            for last in range(units + 1):
                yield (last,)
        else:
            yield (units,)
        return
    for first in range(units + 1):
        for rest in _compositions(units - first, parts - 1, slack):
            yield (first,) + rest


def allocation_count(units, n_ops, allow_slack=False):
    if allow_slack:
        return comb(units + n_ops, n_ops)
    return comb(units + n_ops - 1, n_ops - 1)


def enumerate_allocations(budget, grid_step, n_ops, allow_slack=False):
    """All grid allocations of a budget, one per row, in lexicographic order.

    Args:
        budget (float): total resources.
        grid_step (float): allocation granularity.
        n_ops (int): number of operations.
        allow_slack (bool): allow unspent budget (default: spend all).

    Returns:
        (count, n_ops) array of amounts.
    """
    units = int(np.floor(budget / grid_step + TOLERANCE))
    count = allocation_count(units, n_ops, allow_slack)
    if units > MAX_UNITS or n_ops > MAX_OPS or count > MAX_PROFILES:
        raise CombinatorialBlowup(count)

    rows = list(_compositions(units, n_ops, allow_slack))

    return np.array(rows, dtype=float).reshape(len(rows), n_ops) * grid_step


def _check_allocation(game, alloc, budget):
    x = alloc.as_array(game.operations) if isinstance(alloc, Allocation) else np.asarray(alloc, float)
    if x.size != game.n_ops:
        raise ShapeMismatch("allocation has %d entries for %d operations" % (x.size, game.n_ops))
    units = x / game.grid_step
    if (np.any(x < -TOLERANCE) or x.sum() > budget + TOLERANCE
            or np.any(np.abs(units - np.round(units)) > TOLERANCE)):
        raise InfeasibleAllocation("allocation %s infeasible for budget %g" % (x, budget))

    return x


def strategic_payoff(game, r_d, r_a):
    """(value_d, value_a) of one pure allocation pair."""
    x = _check_allocation(game, r_d, game.budget_d)
    y = _check_allocation(game, r_a, game.budget_a)
    value_d = sum(game.weights[j] * float(game.effective_contest(j, x[j], y[j]))
                  for j in range(game.n_ops))

    return float(value_d), 1.0 - float(value_d)


def payoff_matrix(game, alloc_d, alloc_a):
    """Normal form over allocation pairs (defender rows)."""
    M = np.zeros((alloc_d.shape[0], alloc_a.shape[0]))
    for j in range(game.n_ops):
        if game.weights[j] == 0:
            continue
        M += game.weights[j] * game.effective_contest(
            j, alloc_d[:, j][:, None], alloc_a[:, j][None, :])

    return M


def solve_strategic(game, method="exact_lp", iterations=FP_ITERATIONS):
    """Mixed equilibrium of the discretized allocation game.

    Args:
        game (StrategicGame): the game.
        method (str): 'exact_lp' (simplex on the full normal form) or
            'fictitious_play' (anytime approximation, `iterations` rounds).

    Returns:
        StrategicEquilibrium with mixtures over allocation rows.
    """
    if method not in METHODS:
        raise ValueError("unknown strategic method %r" % method)

    alloc_d = enumerate_allocations(game.budget_d, game.grid_step, game.n_ops, game.allow_slack)
    alloc_a = enumerate_allocations(game.budget_a, game.grid_step, game.n_ops, game.allow_slack)
    if alloc_d.shape[0] * alloc_a.shape[0] > MAX_PROFILES:
        raise CombinatorialBlowup(alloc_d.shape[0] * alloc_a.shape[0])

    M = payoff_matrix(game, alloc_d, alloc_a)
    if method == "exact_lp":
        prof = solve_zero_sum(MatrixGame(M))
    else:
        prof = fictitious_play(MatrixGame(M), iterations)
    logger.debug("strategic game %dx%d solved (%s), value %.6f",
                 M.shape[0], M.shape[1], method, prof.value_d)

    x, y = prof.strategy_d.weights, prof.strategy_a.weights
    op_values = np.array([
        x @ game.effective_contest(j, alloc_d[:, j][:, None], alloc_a[:, j][None, :]) @ y
        for j in range(game.n_ops)])

    return StrategicEquilibrium(
        game=game,
        allocations_d=alloc_d,
        allocations_a=alloc_a,
        strategy_d=prof.strategy_d,
        strategy_a=prof.strategy_a,
        value_d=prof.value_d,
        value_a=1.0 - prof.value_d,
        exploitability=prof.epsilon,
        op_values=op_values,
    )
