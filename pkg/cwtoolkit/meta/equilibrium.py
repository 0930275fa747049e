"""
Warfare equilibrium: the composed sweep Phi and its damped fixed point.

One sweep unfolds top-down (policy -> strategic -> operational -> tactical)
and folds bottom-up (tactical -> operational -> strategic -> policy). The
state carried between sweeps is the policy outcome (w, B) and the outcome
table {op: (f, anchor)}; everything else is recomputed from it.

Example:
    config, trace = find_warfare_equilibrium(scn, damping=0.5, tolerance=1e-6)
    trace.converged, trace.final_residual
    coords(config)                       # flat {name: float} view

Notes:
    The residual compares coords(Phi(x)) with coords(x), so a converged
    configuration certifies itself: one more sweep moves it by <= tolerance.

"""
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import CwError, SweepError
from ..kernel import MixedStrategy
from ..operational import StagePolicy, solve_operational
from ..policy import PolicyOutcome, policy_equilibrium, shapley_value
from ..scenario.schema import defender_index
from ..strategic import solve_strategic
from ..technical import ECHELONS
from ..utils import run_jobs, sup_norm
from .mappings import (ana_P_to_S, ana_S_to_O, cata_O_to_S, cata_S_to_P, seed_policy,
                       unfold_tactical)

logger = logging.getLogger(__name__)

DAMPING = 0.5
TOLERANCE = 1e-6
MAX_ITER = 200


@dataclass(frozen=True)
class EchelonPayoffs:
    """Defender and attacker payoff per echelon."""

    d: dict
    a: dict

    def as_rows(self):
        return [(e, self.d.get(e, 0.0), self.a.get(e, 0.0)) for e in ECHELONS]


@dataclass(frozen=True)
class WarfareConfiguration:
    policy: PolicyOutcome
    feedback: dict = field(default_factory=dict)
    strategic: object = None
    # op -> OperationalSolution / StochasticGameSpec
    operational: dict = field(default_factory=dict)
    games: dict = field(default_factory=dict)
    # (op, a_d, a_a) -> TacticalOutcome
    tactical: dict = field(default_factory=dict)
    tech: object = None
    coalition: object = None
    payoffs: EchelonPayoffs = None
    diagnostics: tuple = ()
    converged: bool = False


@dataclass
class ConvergenceTrace:
    residuals: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self):
        return len(self.residuals)

    @property
    def final_residual(self):
        return self.residuals[-1] if self.residuals else float("inf")


# --- Coordinates --- #


def _fmt(values):
    return ",".join("%g" % v for v in values)


def policy_coords(policy):
    out = {"policy.weights[%s]" % op: float(w)
           for op, w in zip(policy.operations, policy.weights)}
    out["policy.budget"] = float(policy.budget)
    return out


def feedback_coords(feedback):
    out = {}
    for op, (f, anchor) in feedback.items():
        out["feedback.f[%s]" % op] = float(f)
        out["feedback.anchor[%s]" % op] = float(anchor)
    return out


def coords(config):
    """Flat numeric view of a configuration, keyed by coordinate name."""
    out = policy_coords(config.policy)
    out.update(feedback_coords(config.feedback))

    strat = config.strategic
    if strat is not None:
        for row, p in zip(strat.allocations_d, strat.strategy_d.weights):
            out["strategic.x[%s]" % _fmt(row)] = float(p)
        for row, p in zip(strat.allocations_a, strat.strategy_a.weights):
            out["strategic.y[%s]" % _fmt(row)] = float(p)
        out["strategic.value_d"] = float(strat.value_d)

    for op, sol in config.operational.items():
        spec = config.games[op]
        out["operational[%s].value_d" % op] = sol.cumulative_value_d
        out["operational[%s].value_a" % op] = sol.cumulative_value_a
        for (k, s, i), p in np.ndenumerate(sol.policy_d.probs):
            out["operational[%s].pi_d[%d][%s][%s]" % (op, k + 1, spec.states[s],
                                                        spec.actions_d[i])] = float(p)
        for (k, s, i), p in np.ndenumerate(sol.policy_a.probs):
            out["operational[%s].pi_a[%d][%s][%s]" % (op, k + 1, spec.states[s],
                                                        spec.actions_a[i])] = float(p)

    for (op, a_d, a_a), out_t in config.tactical.items():
        out["tactical[%s][%s][%s].U_d" % (op, a_d, a_a)] = float(out_t.U_dT)
        out["tactical[%s][%s][%s].U_a" % (op, a_d, a_a)] = float(out_t.U_aT)

    if config.payoffs is not None:
        for e in ECHELONS:
            out["payoff.d[%s]" % e] = float(config.payoffs.d[e])
            out["payoff.a[%s]" % e] = float(config.payoffs.a[e])

    return out


# --- Payoffs --- #


def operation_weights(strat, operations):
    """Strategic weights of the given operations, renormalised over them."""
    w = np.array([strat.game.weights[strat.operations.index(op)] for op in operations])
    return w / w.sum() if w.sum() > 0 else np.full(w.size, 1.0 / w.size)


def echelon_payoffs(scenario, coalition, strat, solutions, tactical, theta):
    unit = scenario.coalition.value_unit
    d = {"policy": float(shapley_value(coalition)[defender_index(scenario)]),
         "strategic": float(strat.value_d),
         "technical": float(theta.context_payoff_shift)}
    a = {"policy": float(strat.value_a * unit),
         "strategic": float(strat.value_a),
         "technical": -float(theta.context_payoff_shift)}

    if solutions:
        w = operation_weights(strat, list(solutions))
        d["operational"] = float(w @ [s.cumulative_value_d for s in solutions.values()])
        a["operational"] = float(w @ [s.cumulative_value_a for s in solutions.values()])
    else:
        d["operational"] = a["operational"] = 0.0

    if tactical:
        d["tactical"] = min(t.U_dT for t in tactical.values())
        a["tactical"] = max(t.U_aT for t in tactical.values())
    else:
        d["tactical"] = a["tactical"] = 0.0

    return EchelonPayoffs(d, a)


# --- The sweep --- #


def _solve_operation(item):
    spec, selection = item
    return solve_operational(spec, selection)


def _stage(echelon, func, *args, **kwargs):
    try:
        return func(*args, **kwargs)
    except SweepError:
        raise
    except CwError as err:
        raise SweepError(echelon, err) from err


def phi(config, scenario, cache=None, n_jobs=None):
    """One full cross-echelon sweep from the state (policy, feedback)."""
    theta = scenario.tech
    solver = scenario.solver
    s = scenario.strategic
    njobs = solver.n_jobs if n_jobs is None else n_jobs
    incoming = config.feedback if s.apply_feedback else {}
    diagnostics = []

    game = _stage("strategic", ana_P_to_S, config.policy, scenario, theta, incoming)
    strat = _stage("strategic", solve_strategic, game, s.method, solver.fp_iterations)

    specs = _stage("operational", ana_S_to_O, strat, scenario, theta, diagnostics)

    tactical, games = {}, {}
    for op, spec in specs.items():
        outcomes, term = _stage("tactical", unfold_tactical, scenario, op, spec,
                                solver.selection, cache)
        for (a_d, a_a), out in outcomes.items():
            tactical[(op, a_d, a_a)] = out
        games[op] = spec.with_tactical_term(term)

    ops = list(games)
    sols = _stage("operational", run_jobs, _solve_operation,
                  [(games[op], solver.selection) for op in ops], njobs)
    solutions = dict(zip(ops, sols))

    fresh = _stage("strategic", cata_O_to_S, solutions, scenario, strat, theta)
    if s.apply_feedback:
        strat = _stage("strategic", solve_strategic, replace(game, feedback=fresh),
                       s.method, solver.fp_iterations)

    coalition, weights = cata_S_to_P(strat, scenario, config.policy, fresh)
    policy = _stage("policy", policy_equilibrium, coalition, defender_index(scenario),
                    weights, scenario.coalition.budget_rule, theta, scenario.operations)

    return WarfareConfiguration(
        policy=policy,
        feedback=fresh,
        strategic=strat,
        operational=solutions,
        games=games,
        tactical=tactical,
        tech=theta,
        coalition=coalition,
        payoffs=echelon_payoffs(scenario, coalition, strat, solutions, tactical, theta),
        diagnostics=tuple(diagnostics),
    )


def refresh(config, scenario, cache=None):
    """Undamped sweep; returns the new configuration and the residual."""
    new = phi(config, scenario, cache)
    return new, sup_norm(coords(new), coords(config))


def initial_configuration(scenario, cache=None):
    """One sweep from the declared policy and an empty outcome table."""
    return phi(WarfareConfiguration(policy=seed_policy(scenario), tech=scenario.tech),
               scenario, cache)


# --- Damped iteration --- #


def _mix(a, b, eta):
    return (1 - eta) * np.asarray(a, dtype=float) + eta * np.asarray(b, dtype=float)


def _blend_strategic(x, y, eta):
    if x is None or not (np.array_equal(x.allocations_d, y.allocations_d)
                         and np.array_equal(x.allocations_a, y.allocations_a)):
        return y
    value_d = float(_mix(x.value_d, y.value_d, eta))
    return replace(y,
                   strategy_d=MixedStrategy(_mix(x.strategy_d.weights, y.strategy_d.weights, eta)),
                   strategy_a=MixedStrategy(_mix(x.strategy_a.weights, y.strategy_a.weights, eta)),
                   value_d=value_d,
                   value_a=1.0 - value_d,
                   op_values=_mix(x.op_values, y.op_values, eta))


def _blend_operational(x, y, eta):
    if x is None or x.value.shape != y.value.shape \
            or x.policy_d.probs.shape != y.policy_d.probs.shape \
            or x.policy_a.probs.shape != y.policy_a.probs.shape:
        return y
    return replace(y,
                   policy_d=StagePolicy(_mix(x.policy_d.probs, y.policy_d.probs, eta)),
                   policy_a=StagePolicy(_mix(x.policy_a.probs, y.policy_a.probs, eta)),
                   value=_mix(x.value, y.value, eta),
                   value_a=_mix(x.value_a, y.value_a, eta),
                   cumulative_value_d=float(_mix(x.cumulative_value_d, y.cumulative_value_d, eta)),
                   cumulative_value_a=float(_mix(x.cumulative_value_a, y.cumulative_value_a, eta)))


def blend(x, y, eta):
    """(1 - eta) * x + eta * y on every coordinate the two share."""
    if eta >= 1:
        return y

    if x.policy.operations == y.policy.operations:
        policy = PolicyOutcome(y.policy.operations, _mix(x.policy.weights, y.policy.weights, eta),
                               float(_mix(x.policy.budget, y.policy.budget, eta)))
    else:
        policy = y.policy

    feedback = {op: tuple(float(v) for v in _mix(x.feedback[op], fa, eta))
                if op in x.feedback else fa for op, fa in y.feedback.items()}

    tactical = {key: replace(out, U_dT=float(_mix(x.tactical[key].U_dT, out.U_dT, eta)),
                             U_aT=float(_mix(x.tactical[key].U_aT, out.U_aT, eta)))
                if key in x.tactical else out for key, out in y.tactical.items()}

    payoffs = y.payoffs
    if x.payoffs is not None and y.payoffs is not None:
        payoffs = EchelonPayoffs(
            {e: float(_mix(x.payoffs.d[e], v, eta)) for e, v in y.payoffs.d.items()},
            {e: float(_mix(x.payoffs.a[e], v, eta)) for e, v in y.payoffs.a.items()})

    return replace(
        y,
        policy=policy,
        feedback=feedback,
        strategic=_blend_strategic(x.strategic, y.strategic, eta),
        operational={op: _blend_operational(x.operational.get(op), sol, eta)
                     for op, sol in y.operational.items()},
        tactical=tactical,
        payoffs=payoffs,
    )


def find_warfare_equilibrium(scenario, damping=None, tolerance=None, max_iter=None,
                             start=None, n_jobs=None):
    """Damped fixed-point iteration x <- (1 - eta) x + eta Phi(x).

    Args:
        scenario (Scenario): validated scenario.
        damping (float): eta in (0, 1] (default: scenario solver section).
        tolerance (float): sup-norm residual to stop at.
        max_iter (int): iteration cap; reaching it is not an error.
        start (WarfareConfiguration): starting point (default: one sweep
            from the declared policy).

    Returns:
        (WarfareConfiguration, ConvergenceTrace)
    """
    solver = scenario.solver
    eta = solver.damping if damping is None else damping
    tol = solver.tolerance if tolerance is None else tolerance
    max_iter = solver.max_iter if max_iter is None else max_iter
    if not 0 < eta <= 1:
        raise ValueError("damping must lie in (0, 1]")
    if tol <= 0 or max_iter < 1:
        raise ValueError("tolerance must be positive and max_iter >= 1")

    cache = {}
    x = start if start is not None else initial_configuration(scenario, cache)
    x = replace(x, converged=False)
    trace = ConvergenceTrace()

    for it in range(max_iter):
        y = phi(x, scenario, cache, n_jobs)
        r = sup_norm(coords(y), coords(x))
        trace.residuals.append(r)
        trace.snapshots.append({"d": dict(y.payoffs.d), "a": dict(y.payoffs.a)})
        logger.debug("iteration %d: residual %.3e", it + 1, r)
        if r <= tol:
            trace.converged = True
            return replace(x, converged=True), trace
        x = blend(x, y, eta)

    logger.warning("no fixed point after %d iterations (residual %.3e)", max_iter,
                   trace.final_residual)

    return x, trace
