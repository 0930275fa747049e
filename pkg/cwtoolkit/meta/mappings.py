"""
Cross-echelon mappings: unfolds (ana) and folds (cata).

    ana_P_to_S   policy outcome      -> strategic game
    ana_S_to_O   strategic eq.       -> operational game per funded operation
    cata_O_to_S  operational values  -> outcome table (f, anchor) per operation
    cata_S_to_P  strategic eq.       -> coalition value of the defender, weights

The tactical pair (ana_O_to_T / cata_T_to_O) lives in cwtoolkit.tactical;
unfold_tactical() below wires it to a scenario.

"""
import logging

import numpy as np

from ..errors import MissingOperation, NoFeasibleAction
from ..operational import StochasticGameSpec
from ..policy import policy_equilibrium
from ..scenario.schema import (base_weights, coalition_game, contests, defender_index,
                               payoff_range, rule_table, tactic_catalog, transition_array)
from ..strategic import StrategicGame, contest_value
from ..tactical import FeasibilityRule, cata_T_to_O, solve_tactical
from ..utils import normalize

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9
FUNDED = 1e-12


def grid_budget(budget, grid_step):
    """Largest grid multiple not above budget."""
    return float(np.floor(budget / grid_step + TOLERANCE) * grid_step)


def ana_P_to_S(policy, scenario, theta, feedback=None):
    """Strategic game induced by the policy outcome (w, B)."""
    s = scenario.strategic

    return StrategicGame(
        operations=tuple(s.operations),
        weights=policy.weights,
        budget_d=grid_budget(policy.budget, s.grid_step),
        budget_a=s.attacker_budget,
        contests=contests(scenario),
        grid_step=s.grid_step,
        tech=theta,
        allow_slack=s.allow_slack,
        feedback=dict(feedback or {}),
    )


def operation_spec(scenario, op, budget, theta):
    """Stochastic game of one operation for a per-operation budget.

    Defender actions are kept when cost * cost_factor <= budget / K.
    """
    if op not in scenario.operational:
        raise MissingOperation(op)
    tmpl = scenario.operational[op]
    K = tmpl.horizon

    allowed = theta.masked("operational", [a.name for a in tmpl.actions_d], side="d")
    names_d = [a.name for a in tmpl.actions_d
               if a.name in allowed and a.cost * theta.cost_factor <= budget / K + TOLERANCE]
    names_a = theta.masked("operational", tmpl.actions_a, side="a")
    if not names_d:
        raise NoFeasibleAction("%s: no defender action affordable with %.6g per stage"
                               % (op, budget / K))
    if not names_a:
        raise NoFeasibleAction("%s: every attacker action is masked" % op)

    mech = tmpl.mechanisms[tmpl.deception]

    return StochasticGameSpec(
        states=tuple(tmpl.states),
        actions_d=tuple(names_d),
        actions_a=tuple(names_a),
        horizon=K,
        transition=transition_array(tmpl, names_d, names_a),
        stage_payoff_state=[tmpl.state_payoff.get(st, 0.0) for st in tmpl.states],
        stage_payoff_context=mech.context_payoff + theta.context_payoff_shift,
        deception_index=tmpl.deception,
        tech=theta,
        initial_state=tmpl.states.index(tmpl.initial_state),
        general_sum=tmpl.general_sum,
        stage_labels=tuple(tmpl.stage_labels),
    )


def ana_S_to_O(strat, scenario, theta, diagnostics=None):
    """Operational games of the operations funded at the strategic level.

    The mean defender allocation of the mixed equilibrium funds each
    operation. Under-resourced operations are dropped; the reason is
    appended to `diagnostics` when given.
    """
    r_bar = strat.mean_allocation_d
    specs = {}
    for j, op in enumerate(strat.operations):
        if r_bar[j] <= FUNDED:
            continue
        try:
            specs[op] = operation_spec(scenario, op, r_bar[j], theta)
        except NoFeasibleAction as err:
            logger.warning("operation dropped: %s", err)
            if diagnostics is not None:
                diagnostics.append("dropped %s: %s" % (op, err))

    return specs


def unfold_tactical(scenario, op, spec, selection, cache=None):
    """Solve the tactical game of every action pair of an operation.

    Returns:
        (outcomes, term): outcomes maps (a_d, a_a) -> TacticalOutcome, term
        is the (A_d, A_a, 2) tactical term. Operations without a catalog get
        no outcomes and a zero term.
    """
    cid, rules = rule_table(scenario, op)
    if cid is None:
        return {}, np.zeros((len(spec.actions_d), len(spec.actions_a), 2))

    cache = {} if cache is None else cache
    if ("catalog", cid) not in cache:
        cache[("catalog", cid)] = tactic_catalog(scenario, cid)
    catalog = cache[("catalog", cid)]

    outcomes = {}
    for a_d in spec.actions_d:
        for a_a in spec.actions_a:
            rule = rules.get((a_d, a_a)) or FeasibilityRule.idle()
            key = (cid, rule, str(selection))
            if key not in cache:
                cache[key] = solve_tactical(catalog, rule, selection, spec.tech)
            outcomes[(a_d, a_a)] = cache[key]

    return outcomes, cata_T_to_O(outcomes, spec.actions_d, spec.actions_a)


def cata_O_to_S(solutions, scenario, strat, theta):
    """Outcome table {op: (f, anchor)} from operational values.

    f is the cumulative defender value normalized by the declared payoff
    range; anchor is the pure contest value at the mean allocations, where
    the effective contest of the next strategic solve equals f.
    """
    ops = strat.operations
    r_d = strat.mean_allocation_d
    r_a = strat.mean_allocation_a
    table = {}
    for op, sol in solutions.items():
        if op not in ops:
            raise MissingOperation(op)
        j = ops.index(op)
        lo, hi = payoff_range(scenario, op)
        f = float(np.clip((sol.cumulative_value_d - lo) / (hi - lo), 0.0, 1.0))
        anchor = float(contest_value(strat.game.contests[j], r_d[j], r_a[j], theta))
        table[op] = (f, anchor)

    return table


def contribution_share(strat, feedback):
    """Realized contribution per operation, on the simplex."""
    raw = np.array([feedback[op][0] if op in feedback else strat.op_values[j]
                    for j, op in enumerate(strat.operations)])

    return normalize(raw)


def cata_S_to_P(strat, scenario, policy, feedback):
    """Coalition game with v({defender}) from the strategic value, new weights.

    Values of larger coalitions stay as declared by the scenario.
    """
    d = defender_index(scenario)
    game = coalition_game(scenario).with_value(
        (d,), strat.value_d * scenario.coalition.value_unit)

    eta = scenario.strategic.weight_rate
    if eta == 0:
        return game, np.asarray(policy.weights, dtype=float)
    share = contribution_share(strat, feedback)

    return game, normalize((1 - eta) * policy.weights + eta * share)


def seed_policy(scenario):
    """Policy outcome of the declared coalition game and base weights."""
    return policy_equilibrium(coalition_game(scenario), defender_index(scenario),
                              base_weights(scenario), scenario.coalition.budget_rule,
                              scenario.tech, scenario.operations)
