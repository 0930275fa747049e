"""
Round-trip (unfold then fold) consistency checks between echelons.

Each check starts from the upper echelon's state in a configuration,
unfolds to the lower echelon, solves, folds back and measures the
sup-norm distance to where it started. All four vanish (up to the
iteration tolerance) at a warfare equilibrium.

"""
from dataclasses import dataclass

import numpy as np

from ..policy import policy_equilibrium
from ..scenario.schema import defender_index
from ..strategic import solve_strategic
from ..utils import run_jobs, sup_norm
from .equilibrium import _solve_operation, feedback_coords, phi, policy_coords
from .mappings import ana_P_to_S, ana_S_to_O, cata_O_to_S, cata_S_to_P, unfold_tactical

PAIRS = ("P<->S", "S<->O", "O<->T", "P<->T")


@dataclass(frozen=True)
class HylomorphismReport:
    residuals: dict
    # max(0, P<->T - (P<->S + S<->O + O<->T))
    slack: float

    def within(self, tol):
        return all(r <= tol for r in self.residuals.values())


def _policy_round_trip(config, scenario):
    theta = scenario.tech
    s = scenario.strategic
    feedback = config.feedback if s.apply_feedback else {}
    game = ana_P_to_S(config.policy, scenario, theta, feedback)
    strat = solve_strategic(game, s.method, scenario.solver.fp_iterations)
    coalition, weights = cata_S_to_P(strat, scenario, config.policy, config.feedback)
    policy = policy_equilibrium(coalition, defender_index(scenario), weights,
                                scenario.coalition.budget_rule, theta, scenario.operations)

    return sup_norm(policy_coords(policy), policy_coords(config.policy))


def _operational_round_trip(config, scenario, cache):
    theta = scenario.tech
    selection = scenario.solver.selection
    specs = ana_S_to_O(config.strategic, scenario, theta)
    games = {op: spec.with_tactical_term(unfold_tactical(scenario, op, spec, selection, cache)[1])
             for op, spec in specs.items()}
    ops = list(games)
    sols = run_jobs(_solve_operation, [(games[op], selection) for op in ops],
                    scenario.solver.n_jobs)
    table = cata_O_to_S(dict(zip(ops, sols)), scenario, config.strategic, theta)

    return sup_norm(feedback_coords(table), feedback_coords(config.feedback))


def _tactical_round_trip(config, scenario, cache):
    selection = scenario.solver.selection
    gap = 0.0
    for op, spec in config.games.items():
        term = unfold_tactical(scenario, op, spec, selection, cache)[1]
        if term.size:
            gap = max(gap, float(np.max(np.abs(term - spec.tactical_term))))

    return gap


def check_hylomorphism(config, scenario, pair, cache=None):
    """Residual of one round trip: 'P<->S', 'S<->O', 'O<->T' or 'P<->T'."""
    cache = {} if cache is None else cache
    if pair == "P<->S":
        return _policy_round_trip(config, scenario)
    if pair == "S<->O":
        return _operational_round_trip(config, scenario, cache)
    if pair == "O<->T":
        return _tactical_round_trip(config, scenario, cache)
    if pair == "P<->T":
        new = phi(config, scenario, cache)
        return sup_norm(policy_coords(new.policy), policy_coords(config.policy))

    raise ValueError("unknown echelon pair %r (expected one of %s)" % (pair, PAIRS))


def hylomorphism_report(config, scenario):
    cache = {}
    residuals = {pair: check_hylomorphism(config, scenario, pair, cache) for pair in PAIRS}
    partial = residuals["P<->S"] + residuals["S<->O"] + residuals["O<->T"]

    return HylomorphismReport(residuals, max(0.0, residuals["P<->T"] - partial))
