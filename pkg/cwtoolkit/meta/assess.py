"""
Stability, dominance and winning verdicts at a warfare equilibrium.

Shock and attacker-deviation sets are finite and declared by the scenario;
each verdict comes with the evidence it was decided on.

"""
import logging
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from ..errors import IndexOutOfRange, MissingPair, NotConverged
from ..operational import evaluate_policies
from ..scenario.schema import Thresholds, tactic_catalog, rule_table
from ..strategic import Allocation, strategic_payoff
from ..tactical import TacticSequence, sequence_payoff
from ..technical import ECHELONS
from ..utils import run_jobs, sup_norm
from .equilibrium import coords, operation_weights
from .perturb import perturb_and_propagate

logger = logging.getLogger(__name__)

STABILITY_TOLERANCE = 1e-3


@dataclass
class AssessmentVerdicts:
    stable: bool
    dominant: bool
    winning: bool
    lose_battle_win_war: bool
    evidence: dict = field(default_factory=dict)


# --- Winning --- #


def winning(payoffs, thresholds):
    """Threshold check over the declared winning echelons.

    Echelons without a threshold are unbounded on that side.
    """
    checks = {}
    for e in thresholds.winning_echelons:
        ok_d = payoffs.d[e] >= thresholds.theta_d.get(e, -np.inf)
        ok_a = payoffs.a[e] <= thresholds.theta_a.get(e, np.inf)
        checks[e] = bool(ok_d and ok_a)

    return all(checks.values()), checks


def lose_battle_win_war(config, thresholds, won):
    """Some tactical encounter below the tactical threshold, war still won."""
    if "tactical" not in thresholds.theta_d or not config.tactical:
        return False
    worst = min(t.U_dT for t in config.tactical.values())

    return bool(won and worst < thresholds.theta_d["tactical"])


# --- Dominance --- #


def _strategic_deviation(config, dev):
    strat = config.strategic
    game = strat.game
    if dev.budget is not None:
        game = replace(game, budget_a=dev.budget)
    alloc = Allocation({op: dev.allocation.get(op, 0.0) for op in game.operations})
    value_d = sum(p * strategic_payoff(game, row, alloc)[0]
                  for p, row in zip(strat.strategy_d.weights, strat.allocations_d) if p > 0)

    return 1.0 - value_d


def _operational_deviation(config, dev):
    if dev.operation not in config.operational:
        raise MissingPair("operation %s was not instantiated" % dev.operation)
    spec = config.games[dev.operation]
    sol = config.operational[dev.operation]
    if dev.action not in spec.actions_a:
        raise IndexOutOfRange("attacker action %s not available in %s"
                              % (dev.action, dev.operation))
    probs_a = np.zeros(len(spec.actions_a))
    probs_a[spec.actions_a.index(dev.action)] = 1.0
    _, Va = evaluate_policies(spec, sol.policy_d.probs, probs_a)

    # scored on the same weighted average as the operational payoff
    ops = list(config.operational)
    values = [s.cumulative_value_a for s in config.operational.values()]
    values[ops.index(dev.operation)] = float(Va[0, spec.initial_state])

    return float(operation_weights(config.strategic, ops) @ values)


def _tactical_deviation(config, scenario, dev):
    key = (dev.operation, dev.action_d, dev.action_a)
    if key not in config.tactical:
        raise MissingPair("no tactical outcome for %s" % (key,))
    out = config.tactical[key]
    cid, _ = rule_table(scenario, dev.operation)
    catalog = tactic_catalog(scenario, cid)
    xi_a = TacticSequence(tuple(dev.sequence))

    return sum(p * sequence_payoff(catalog, xi_d, xi_a)[1]
               for p, xi_d in zip(out.strategy_d.weights, out.sequences_d) if p > 0)


def deviation_payoff(config, scenario, dev):
    """Attacker payoff of one declared deviation, defender held fixed."""
    if dev.echelon == "strategic":
        return _strategic_deviation(config, dev)
    if dev.echelon == "operational":
        return _operational_deviation(config, dev)

    return _tactical_deviation(config, scenario, dev)


def dominance(config, scenario, deviations=None):
    """Defender payoff >= attacker's best payoff at every echelon in scope.

    The scope is the strategic echelon plus every echelon named by a
    declared deviation.
    """
    deviations = scenario.deviations if deviations is None else deviations
    scope = sorted({"strategic"} | {dev.echelon for dev in deviations},
                   key=ECHELONS.index)
    best = {e: config.payoffs.a[e] for e in scope}
    found = {}
    for dev in deviations:
        u = deviation_payoff(config, scenario, dev)
        found[dev.name] = u
        best[dev.echelon] = max(best[dev.echelon], u)

    checks = {e: bool(config.payoffs.d[e] >= best[e]) for e in scope}

    return all(checks.values()), {"checks": checks, "attacker_best": best, "deviations": found}


# --- Stability --- #


def _shock(config, scenario, tol, shock):
    rep = perturb_and_propagate(config, scenario, shock.site, shock.delta)
    distance = sup_norm(coords(rep.config), coords(config))
    return {"name": shock.name or shock.site, "site": shock.site, "delta": shock.delta,
            "converged": rep.converged, "iterations": rep.iterations, "distance": distance,
            "stable": bool(rep.converged and distance <= tol)}


def stability(config, scenario, shocks, tolerance=None, n_jobs=None):
    tol = scenario.solver.stability_tolerance if tolerance is None else tolerance
    njobs = scenario.solver.n_jobs if n_jobs is None else n_jobs
    results = run_jobs(partial(_shock, config, scenario, tol), list(shocks), njobs)

    return all(r["stable"] for r in results), results


def assess(config, thresholds, scenario, shock_set=()):
    """Stable / dominant / winning verdicts with their evidence."""
    if not config.converged:
        raise NotConverged("assessment requires a converged configuration")
    if thresholds is None:
        thresholds = scenario.thresholds
    elif not isinstance(thresholds, Thresholds):
        thresholds = Thresholds.model_validate(thresholds)

    stable, shocks = stability(config, scenario, shock_set)
    dominant, dom = dominance(config, scenario)
    won, checks = winning(config.payoffs, thresholds)
    lbww = lose_battle_win_war(config, thresholds, won)
    if lbww:
        logger.info("tactical payoff below threshold while the war is won")

    return AssessmentVerdicts(
        stable=stable,
        dominant=dominant,
        winning=won,
        lose_battle_win_war=lbww,
        evidence={"shocks": shocks, "dominance": dom, "winning": checks},
    )
