"""
Tactical echelon: nonzero-sum games over tactic sequences.

An operational action pair (a_d, a_a) unfolds into the sets of feasible
tactic sequences of both sides; the induced bimatrix game over sequence
pairs is solved by support enumeration and folded back as the tactical
term (U_dT, U_aT) of the operational stage payoff.

Example:
    rule = FeasibilityRule(allowed_d=('t1', 't2'), allowed_a=('t1', 't2'),
                           max_len_d=2, max_len_a=1)
    enumerate_sequences(rule, 'defender')   # (t1), (t2), (t1,t2), (t2,t1)
    solve_tactical(catalog, rule).U_dT

Notes:
    Sequences of unequal length are paired step by step; the shorter side
    plays the implicit "idle" tactic, whose payoff pair is set per catalog.

"""
import math
from dataclasses import dataclass, field
from itertools import permutations, product

import numpy as np

from .errors import EnumerationCapExceeded, MissingPair, UnknownTactic
from .kernel import (ENUMERATION_CAP, BimatrixGame, EquilibriumSelectionRule,
                     solve_bimatrix)

IDLE = "idle"
SIDES = ("defender", "attacker")


@dataclass(frozen=True)
class TacticCatalog:
    tactics_d: tuple
    tactics_a: tuple
    # (tactic_d, tactic_a) -> (payoff_d, payoff_a)
    pair_payoff: dict
    step_discount: float = 1.0
    idle_payoff: tuple = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "tactics_d", tuple(self.tactics_d))
        object.__setattr__(self, "tactics_a", tuple(self.tactics_a))
        if not 0 < self.step_discount <= 1:
            raise ValueError("step_discount must lie in (0, 1]")
        for pair in product(self.tactics_d, self.tactics_a):
            if pair not in self.pair_payoff:
                raise MissingPair("pair_payoff lacks %s x %s" % pair)

    def payoff(self, t_d, t_a):
        if t_d != IDLE and t_d not in self.tactics_d:
            raise UnknownTactic(t_d)
        if t_a != IDLE and t_a not in self.tactics_a:
            raise UnknownTactic(t_a)
        if IDLE in (t_d, t_a):
            return tuple(self.idle_payoff)

        return tuple(self.pair_payoff[(t_d, t_a)])


@dataclass(frozen=True)
class FeasibilityRule:
    allowed_d: tuple
    allowed_a: tuple
    max_len_d: int = 1
    max_len_a: int = 1
    repetition: str = "forbidden"

    def __post_init__(self):
        object.__setattr__(self, "allowed_d", tuple(sorted(set(self.allowed_d))))
        object.__setattr__(self, "allowed_a", tuple(sorted(set(self.allowed_a))))
        if not self.allowed_d or not self.allowed_a:
            raise ValueError("allowed tactic sets must be nonempty")
        if self.max_len_d < 1 or self.max_len_a < 1:
            raise ValueError("maximum sequence lengths must be >= 1")
        if self.repetition not in ("allowed", "forbidden"):
            raise ValueError("repetition must be 'allowed' or 'forbidden'")

    @classmethod
    def idle(cls):
        return cls((IDLE,), (IDLE,))

    def masked(self, theta):
        """Drop tactics masked by the technology level (idle if emptied)."""
        if theta is None:
            return self
        allowed_d = theta.masked("tactical", self.allowed_d, side="d") or [IDLE]
        allowed_a = theta.masked("tactical", self.allowed_a, side="a") or [IDLE]

        return FeasibilityRule(allowed_d, allowed_a, self.max_len_d, self.max_len_a,
                               self.repetition)


@dataclass(frozen=True)
class TacticSequence:
    steps: tuple

    def __len__(self):
        return len(self.steps)

    def __str__(self):
        return ">".join(self.steps)


@dataclass(frozen=True)
class TacticalOutcome:
    xi_d: TacticSequence
    xi_a: TacticSequence
    U_dT: float
    U_aT: float
    epsilon: float
    sequences_d: tuple = field(default=(), repr=False)
    sequences_a: tuple = field(default=(), repr=False)
    strategy_d: object = field(default=None, repr=False)
    strategy_a: object = field(default=None, repr=False)


def sequence_count(n, max_len, repetition):
    if repetition == "allowed":
        return sum(n ** k for k in range(1, max_len + 1))
    return sum(math.perm(n, k) for k in range(1, min(max_len, n) + 1))


def enumerate_sequences(rule, side):
    """Feasible sequences of one side, shortest first then lexicographic."""
    if side not in SIDES:
        raise ValueError("side must be one of %s" % (SIDES,))
    allowed = rule.allowed_d if side == "defender" else rule.allowed_a
    max_len = rule.max_len_d if side == "defender" else rule.max_len_a

    count = sequence_count(len(allowed), max_len, rule.repetition)
    if count > ENUMERATION_CAP:
        raise EnumerationCapExceeded(count, ENUMERATION_CAP)

    out = []
    for k in range(1, max_len + 1):
        if rule.repetition == "allowed":
            steps = product(allowed, repeat=k)
        else:
            steps = permutations(allowed, k)
        out.extend(TacticSequence(tuple(s)) for s in steps)

    return out


def sequence_payoff(catalog, xi_d, xi_a):
    """Discounted stepwise payoff pair of two sequences."""
    steps_d = xi_d.steps if isinstance(xi_d, TacticSequence) else tuple(xi_d)
    steps_a = xi_a.steps if isinstance(xi_a, TacticSequence) else tuple(xi_a)
    total_d = total_a = 0.0
    for i in range(max(len(steps_d), len(steps_a))):
        t_d = steps_d[i] if i < len(steps_d) else IDLE
        t_a = steps_a[i] if i < len(steps_a) else IDLE
        u_d, u_a = catalog.payoff(t_d, t_a)
        disc = catalog.step_discount ** i
        total_d += disc * u_d
        total_a += disc * u_a

    return total_d, total_a


def solve_tactical(catalog, rule, selection=EquilibriumSelectionRule.DEFENDER_OPTIMAL,
                   theta=None):
    """Equilibrium of the sequence game induced by a feasibility rule."""
    rule = rule.masked(theta)
    seq_d = enumerate_sequences(rule, "defender")
    seq_a = enumerate_sequences(rule, "attacker")

    U_d = np.zeros((len(seq_d), len(seq_a)))
    U_a = np.zeros_like(U_d)
    for i, xi_d in enumerate(seq_d):
        for j, xi_a in enumerate(seq_a):
            U_d[i, j], U_a[i, j] = sequence_payoff(catalog, xi_d, xi_a)

    prof = solve_bimatrix(BimatrixGame(U_d, U_a), selection)

    return TacticalOutcome(
        xi_d=seq_d[prof.strategy_d.support[0]],
        xi_a=seq_a[prof.strategy_a.support[0]],
        U_dT=prof.value_d,
        U_aT=prof.value_a,
        epsilon=prof.epsilon,
        sequences_d=tuple(seq_d),
        sequences_a=tuple(seq_a),
        strategy_d=prof.strategy_d,
        strategy_a=prof.strategy_a,
    )


def induced_game(catalog, outcome):
    """Bimatrix game an outcome was solved on (for certificates)."""
    U_d = np.array([[sequence_payoff(catalog, a, b)[0] for b in outcome.sequences_a]
                    for a in outcome.sequences_d])
    U_a = np.array([[sequence_payoff(catalog, a, b)[1] for b in outcome.sequences_a]
                    for a in outcome.sequences_d])

    return BimatrixGame(U_d, U_a)


# --- Operational <-> tactical mappings --- #


def ana_O_to_T(rule_table, a_d, a_a, default_rule=None):
    """Unfold an operational action pair into both feasible sequence sets."""
    rule = rule_table.get((a_d, a_a))
    if rule is None:
        rule = default_rule or FeasibilityRule.idle()

    return enumerate_sequences(rule, "defender"), enumerate_sequences(rule, "attacker")


def cata_T_to_O(outcomes, actions_d, actions_a):
    """Fold tactical outcomes into the (|A_d|, |A_a|, 2) tactical term."""
    term = np.zeros((len(actions_d), len(actions_a), 2))
    for i, a_d in enumerate(actions_d):
        for j, a_a in enumerate(actions_a):
            if (a_d, a_a) not in outcomes:
                raise MissingPair("no tactical outcome for (%s, %s)" % (a_d, a_a))
            out = outcomes[(a_d, a_a)]
            term[i, j] = out.U_dT, out.U_aT

    return term
