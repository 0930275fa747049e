"""
Built-in scenarios, addressable on the command line as '@<name>'.

    minimal          one player, operation, state and tactic per side
    degenerate       constant sweep: the first iterate is the fixed point
    decoy-sacrifice  a lost tactical encounter inside a won campaign
    strategic-test   bare allocation game (no feedback, fixed weights)
    redcyber         flagship campaign, five operations
    redcyber-small   reduced campaign used for convergence checks

"""
from ..errors import UnknownCategory
from .schema import Scenario, check_scenario


def _build(doc):
    return check_scenario(Scenario.model_validate(doc))


def single_stage(action_d, action_a, state="s0", payoff=0.0, mechanism="none", context=0.0):
    """One-state, one-stage operation template."""
    return {
        "horizon": 1,
        "states": [state],
        "initial_state": state,
        "actions_d": [{"name": action_d}],
        "actions_a": [action_a],
        "state_payoff": {state: payoff},
        "deception": mechanism,
        "mechanisms": {mechanism: {"context_payoff": context}},
    }


def minimal():
    return _build({
        "metadata": {"name": "minimal", "description": "smallest valid scenario"},
        "coalition": {"players": ["blue"], "defender": "blue",
                      "budget_rule": {"base": 1.0, "scale": 0.0}},
        "strategic": {"operations": ["op"], "base_weights": {"op": 1.0},
                      "attacker_budget": 1.0},
        "operational": {"op": single_stage("hold", "push")},
        "tactical": {
            "catalogs": {"basic": {
                "tactics_d": ["guard"], "tactics_a": ["probe"],
                "pair_payoffs": [{"tactic_d": "guard", "tactic_a": "probe",
                                  "payoff": [0.0, 0.0]}]}},
            "feasibility": {"op": {"catalog": "basic", "rules": [
                {"action_d": "hold", "action_a": "push",
                 "allowed_d": ["guard"], "allowed_a": ["probe"]}]}},
        },
    })


def degenerate():
    """Every echelon has a unique, input-independent equilibrium."""
    return _build({
        "metadata": {"name": "degenerate",
                     "description": "constant budget, dominant tactics, one stage"},
        "coalition": {"players": ["blue"], "defender": "blue",
                      "budget_rule": {"base": 2.0, "scale": 0.0}},
        "strategic": {"operations": ["op"], "base_weights": {"op": 1.0},
                      "attacker_budget": 1.0, "payoff_range": [0.0, 2.0]},
        "operational": {"op": single_stage("hold", "push")},
        "tactical": {
            "catalogs": {"duel": {
                "tactics_d": ["guard", "wait"], "tactics_a": ["probe", "wait"],
                "pair_payoffs": [
                    {"tactic_d": "guard", "tactic_a": "probe", "payoff": [1.0, 0.0]},
                    {"tactic_d": "guard", "tactic_a": "wait", "payoff": [2.0, -1.0]},
                    {"tactic_d": "wait", "tactic_a": "probe", "payoff": [0.0, 1.0]},
                    {"tactic_d": "wait", "tactic_a": "wait", "payoff": [1.0, 0.0]}]}},
            "feasibility": {"op": {"catalog": "duel", "rules": [
                {"action_d": "hold", "action_a": "push",
                 "allowed_d": ["guard", "wait"], "allowed_a": ["probe", "wait"]}]}},
        },
    })


def decoy_sacrifice():
    """A decoy is given up at the tactical level; the campaign is still won.

    The decoy encounter pays -1 to the defender, below the tactical
    threshold 0, while the operation value (-1 + 2.0 + 0.5 = 1.5 on the
    range [-2, 2]) keeps the defender at f = 0.875 and the policy payoff
    (8.75 units) above its threshold.
    """
    return _build({
        "metadata": {"name": "decoy-sacrifice",
                     "description": "lose the battle, win the war"},
        "coalition": {"players": ["blue"], "defender": "blue", "value_unit": 10.0,
                      "budget_rule": {"base": 2.0, "scale": 0.0}},
        "strategic": {"operations": ["lure"], "base_weights": {"lure": 1.0},
                      "attacker_budget": 1.0, "payoff_range": [-2.0, 2.0]},
        "operational": {"lure": single_stage("decoy", "probe", state="engaged", payoff=2.0,
                                             mechanism="honeypots", context=0.5)},
        "tactical": {
            "catalogs": {"sacrifice": {
                "tactics_d": ["expose_decoy"], "tactics_a": ["exploit"],
                "pair_payoffs": [{"tactic_d": "expose_decoy", "tactic_a": "exploit",
                                  "payoff": [-1.0, 1.0]}]}},
            "feasibility": {"lure": {"catalog": "sacrifice", "rules": [
                {"action_d": "decoy", "action_a": "probe",
                 "allowed_d": ["expose_decoy"], "allowed_a": ["exploit"]}]}},
        },
        "thresholds": {"theta_d": {"policy": 5.0, "tactical": 0.0},
                       "theta_a": {"policy": 3.0},
                       "winning_echelons": ["policy"]},
    })


def strategic_test():
    """Allocation game alone: fixed weights, constant budget, no feedback."""
    return _build({
        "metadata": {"name": "strategic-test", "description": "bare allocation game"},
        "coalition": {"players": ["blue"], "defender": "blue",
                      "budget_rule": {"base": 2.0, "scale": 0.0}},
        "strategic": {"operations": ["alpha", "beta"],
                      "base_weights": {"alpha": 0.6, "beta": 0.4},
                      "attacker_budget": 2.0, "weight_rate": 0.0,
                      "apply_feedback": False},
        "operational": {"alpha": single_stage("hold", "push"),
                        "beta": single_stage("hold", "push")},
        "shock_sets": {"budget": [{"name": "one more unit", "site": "policy.budget",
                                   "delta": 1.0}]},
        "deviations": [{"name": "all-in alpha", "echelon": "strategic",
                        "allocation": {"alpha": 2.0}}],
    })


def _redcyber():
    from .redcyber import redcyber_scenario

    return redcyber_scenario()


def _redcyber_small():
    from .redcyber import redcyber_small_scenario

    return redcyber_small_scenario()


BUILTINS = {
    "minimal": minimal,
    "degenerate": degenerate,
    "decoy-sacrifice": decoy_sacrifice,
    "strategic-test": strategic_test,
    "redcyber": _redcyber,
    "redcyber-small": _redcyber_small,
}


def builtin(name):
    if name not in BUILTINS:
        raise UnknownCategory("unknown built-in scenario '%s' (known: %s)"
                              % (name, ", ".join(sorted(BUILTINS))))
    return BUILTINS[name]()
