"""
Perturbation sites and propagation of shocks through the echelons.

Sites:
    policy.budget
    policy.weights[<op>]
    tech.<field>
    tactical.pair_payoff[<catalog>][<tactic_d>][<tactic_a>]
    operational.transition[<op>][<state>][<action_d>][<action_a>][<next state>]

A shock edits the scenario (and, for policy sites, the state of the
configuration it starts from) and the fixed-point search is re-run.

"""
import re
from dataclasses import dataclass, field, replace

import numpy as np
import pydantic

from ..errors import NotConverged
from ..policy import PolicyOutcome
from ..scenario.schema import (PairPayoff, TransitionEntry, check_scenario,
                               transition_array)
from ..technical import ECHELONS, TechLevel
from ..utils import normalize
from .equilibrium import find_warfare_equilibrium

TECH_FIELDS = ("budget_multiplier", "contest_sharpness", "context_payoff_shift", "cost_factor")

_SITE = re.compile(r"^(\w+)\.(\w+)((?:\[[^\[\]]+\])*)$")
_KEY = re.compile(r"\[([^\[\]]+)\]")


def parse_site(site, scenario):
    """Split a site into (echelon, name, keys); raises ValueError if unknown."""
    m = _SITE.match(site.strip())
    if not m:
        raise ValueError("malformed perturbation site %r" % site)
    head, name, rest = m.group(1), m.group(2), m.group(3)
    keys = tuple(_KEY.findall(rest))

    def expect(n):
        if len(keys) != n:
            raise ValueError("site %s takes %d index(es), got %d" % (head + "." + name, n,
                                                                     len(keys)))

    if head == "policy" and name == "budget":
        expect(0)
    elif head == "policy" and name == "weights":
        expect(1)
        if keys[0] not in scenario.operations:
            raise ValueError("unknown operation '%s'" % keys[0])
    elif head == "tech":
        expect(0)
        if name not in TECH_FIELDS:
            raise ValueError("unknown technology field '%s'" % name)
    elif head == "tactical" and name == "pair_payoff":
        expect(3)
        cat = scenario.tactical.catalogs.get(keys[0])
        if cat is None:
            raise ValueError("unknown catalog '%s'" % keys[0])
        if keys[1] not in cat.tactics_d or keys[2] not in cat.tactics_a:
            raise ValueError("unknown tactic pair (%s, %s)" % keys[1:])
    elif head == "operational" and name == "transition":
        expect(5)
        tmpl = scenario.operational.get(keys[0])
        if tmpl is None:
            raise ValueError("unknown operation '%s'" % keys[0])
        if keys[1] not in tmpl.states or keys[4] not in tmpl.states:
            raise ValueError("unknown state in %s" % site)
        if keys[2] not in [a.name for a in tmpl.actions_d] or keys[3] not in tmpl.actions_a:
            raise ValueError("unknown action pair (%s, %s)" % keys[2:4])
    else:
        raise ValueError("unknown perturbation site %r" % site)

    return head, name, keys


def _perturb_transition(tmpl, keys, delta):
    _, state, a_d, a_a, nxt = keys
    names_d = [a.name for a in tmpl.actions_d]
    T = transition_array(tmpl, names_d, tmpl.actions_a)
    s = tmpl.states.index(state)
    row = T[s, names_d.index(a_d), tmpl.actions_a.index(a_a)].copy()
    row[tmpl.states.index(nxt)] += delta
    row = normalize(row)

    mech = tmpl.mechanisms[tmpl.deception]
    kept = [e for e in mech.transition
            if (e.state, e.action_d, e.action_a) != (state, a_d, a_a)]
    entry = TransitionEntry(state=state, action_d=a_d, action_a=a_a,
                            next={st: float(p) for st, p in zip(tmpl.states, row) if p > 0})
    mech.transition = kept + [entry]


def apply_perturbation(config, scenario, site, delta):
    """Perturbed (configuration, scenario); delta 0 returns both unchanged."""
    head, name, keys = parse_site(site, scenario)
    if delta == 0:
        return config, scenario

    scn = scenario.model_copy(deep=True)
    policy = config.policy

    if head == "policy" and name == "budget":
        rule = scn.coalition.budget_rule
        scn.coalition.budget_rule = rule.model_copy(update={"base": rule.base + delta})
        policy = PolicyOutcome(policy.operations, policy.weights, max(policy.budget + delta, 0.0))
    elif head == "policy":
        ops = list(scn.strategic.operations)
        j = ops.index(keys[0])
        w = np.array([scn.strategic.base_weights[op] for op in ops])
        w[j] += delta
        w = normalize(w)
        scn.strategic.base_weights = dict(zip(ops, (float(x) for x in w)))
        pw = np.array(policy.weights, dtype=float)
        pw[policy.operations.index(keys[0])] += delta
        policy = PolicyOutcome(policy.operations, normalize(pw), policy.budget)
    elif head == "tech":
        values = scn.tech.model_dump()
        values[name] += delta
        try:
            scn.tech = TechLevel(**values)
        except pydantic.ValidationError as err:
            raise ValueError("perturbed %s is invalid: %s" % (site, err.errors()[0]["msg"]))
    elif head == "tactical":
        cat = scn.tactical.catalogs[keys[0]]
        cat.pair_payoffs = [
            PairPayoff(tactic_d=e.tactic_d, tactic_a=e.tactic_a,
                       payoff=(e.payoff[0] + delta, e.payoff[1]))
            if (e.tactic_d, e.tactic_a) == (keys[1], keys[2]) else e
            for e in cat.pair_payoffs]
    else:
        _perturb_transition(scn.operational[keys[0]], keys, delta)

    return replace(config, policy=policy), check_scenario(scn)


@dataclass
class PerturbationReport:
    site: str
    delta: float
    deltas_d: dict
    deltas_a: dict
    iterations: int
    converged: bool
    trace: object = field(repr=False, default=None)
    config: object = field(repr=False, default=None)
    scenario: object = field(repr=False, default=None)


def perturb_and_propagate(config, scenario, site, delta, damping=None, tolerance=None,
                          max_iter=None, n_jobs=None):
    """Apply a shock at a converged configuration and re-converge.

    Returns:
        PerturbationReport with signed per-echelon payoff deltas.
    """
    if not config.converged:
        raise NotConverged("perturbation requires a converged configuration")

    start, scn = apply_perturbation(config, scenario, site, delta)
    new, trace = find_warfare_equilibrium(scn, damping, tolerance, max_iter, start=start,
                                          n_jobs=n_jobs)

    return PerturbationReport(
        site=site,
        delta=delta,
        deltas_d={e: new.payoffs.d[e] - config.payoffs.d[e] for e in ECHELONS},
        deltas_a={e: new.payoffs.a[e] - config.payoffs.a[e] for e in ECHELONS},
        iterations=trace.iterations,
        converged=trace.converged,
        trace=trace,
        config=new,
        scenario=scn,
    )
