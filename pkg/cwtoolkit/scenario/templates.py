"""
Taxonomy templates: scenario skeletons per conflict category.

    asymmetric   security game with resource imbalance (defender budget
                 below the attacker's, unequal action costs)
    symmetric    zero-sum encounters (payoff_a = -payoff_d everywhere)
    escalatory   stochastic game over an escalation ladder, K >= 3, with
                 stage payoffs non-decreasing along the stages

Every skeleton is a complete, validating scenario meant to be edited.

"""
from dataclasses import dataclass
from typing import Callable

from ..errors import UnknownCategory
from .schema import Scenario, check_scenario


@dataclass(frozen=True)
class TaxonomyTemplate:
    category: str
    description: str
    generator: Callable

    def instantiate(self):
        return check_scenario(Scenario.model_validate(self.generator()))


def _base(name, description, budget, attacker_budget, operational, tactical):
    return {
        "metadata": {"name": name, "description": description},
        "coalition": {"players": ["defender"], "defender": "defender",
                      "budget_rule": {"base": budget, "scale": 0.0}},
        "strategic": {"operations": list(operational),
                      "base_weights": {op: 1.0 / len(operational) for op in operational},
                      "attacker_budget": attacker_budget,
                      "payoff_range": [-3.0, 3.0]},
        "operational": operational,
        "tactical": tactical,
    }


def _single(actions_d, actions_a, payoff=0.0):
    return {
        "horizon": 1,
        "states": ["engaged"],
        "initial_state": "engaged",
        "actions_d": actions_d,
        "actions_a": actions_a,
        "state_payoff": {"engaged": payoff},
        "deception": "none",
        "mechanisms": {"none": {}},
    }


def _asymmetric():
    op = _single([{"name": "patch", "cost": 0.1}, {"name": "monitor", "cost": 0.5}],
                 ["exploit"])
    return _base("asymmetric", "security game with resource imbalance", 2.0, 4.0,
                 {"perimeter": op, "core": op}, {})


def _symmetric():
    pay_d = {("block", "strike"): 1.0, ("block", "feint"): -1.0,
             ("parry", "strike"): -1.0, ("parry", "feint"): 1.0}
    catalog = {
        "tactics_d": ["block", "parry"],
        "tactics_a": ["strike", "feint"],
        "pair_payoffs": [{"tactic_d": d, "tactic_a": a, "payoff": [u, -u]}
                         for (d, a), u in pay_d.items()],
    }
    op = _single([{"name": "engage"}], ["engage"])
    tactical = {"catalogs": {"mirror": catalog},
                "feasibility": {"skirmish": {"catalog": "mirror", "rules": [
                    {"action_d": "engage", "action_a": "engage",
                     "allowed_d": ["block", "parry"], "allowed_a": ["strike", "feint"]}]}}}
    return _base("symmetric", "zero-sum matrix encounters", 2.0, 2.0, {"skirmish": op}, tactical)


def _escalatory(levels=4):
    states = ["level%d" % (i + 1) for i in range(levels)]
    climb = [{"state": s, "next": {states[min(i + 1, levels - 1)]: 1.0}}
             for i, s in enumerate(states)]
    op = {
        "horizon": levels,
        "states": states,
        "initial_state": states[0],
        "actions_d": [{"name": "contain"}, {"name": "retaliate"}],
        "actions_a": ["press", "hold"],
        "state_payoff": {s: 0.25 * i for i, s in enumerate(states)},
        "deception": "ladder",
        "mechanisms": {"ladder": {"transition": climb}},
    }
    return _base("escalatory", "stochastic game over an escalation ladder", 2.0, 2.0,
                 {"escalation": op}, {})


TEMPLATES = {
    "asymmetric": TaxonomyTemplate("asymmetric", "security game with resource imbalance",
                                   _asymmetric),
    "symmetric": TaxonomyTemplate("symmetric", "zero-sum matrix games", _symmetric),
    "escalatory": TaxonomyTemplate("escalatory",
                                   "repeated/stochastic games with state transitions",
                                   _escalatory),
}


def instantiate_template(category):
    """Validated scenario skeleton for a taxonomy category."""
    if category not in TEMPLATES:
        raise UnknownCategory("unknown category '%s' (known: %s)"
                              % (category, ", ".join(sorted(TEMPLATES))))
    return TEMPLATES[category].instantiate()
