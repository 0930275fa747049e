"""
Run reports: per-echelon results, convergence trace, consistency
residuals and verdicts.

Two renderings:
    machine     canonical JSON (sorted keys); timings are left out so that
                identical runs give byte-identical documents
    human_text  tables rendered with pandas

"""
import json
from typing import Dict, List, Optional

import pandas as pd
import pydantic
from pydantic import BaseModel, ConfigDict, Field

from ..errors import ParseError, ScenarioValidationError
from ..technical import ECHELONS

FORMATS = ("machine", "human_text")
TAIL = 5


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RunInfo(_Model):
    scenario: str
    version: str
    seed: int = 0
    damping: float
    tolerance: float
    max_iter: int
    timings: Dict[str, float] = Field(default_factory=dict, exclude=True)


class PolicySummary(_Model):
    budget: float
    weights: Dict[str, float]


class StrategicSummary(_Model):
    value_d: float
    value_a: float
    exploitability: float
    grid_step: float
    mean_allocation_d: Dict[str, float]
    mean_allocation_a: Dict[str, float]


class OperationSummary(_Model):
    operation: str
    deception: str
    actions_d: List[str]
    actions_a: List[str]
    value_d: float
    value_a: float
    f: float
    anchor: float


class TacticalSummary(_Model):
    operation: str
    action_d: str
    action_a: str
    xi_d: str
    xi_a: str
    U_dT: float
    U_aT: float


class EchelonRow(_Model):
    echelon: str
    payoff_d: float
    payoff_a: float


class TraceSummary(_Model):
    converged: bool
    iterations: int
    final_residual: float
    residuals: List[float]


class ShockResult(_Model):
    name: str
    site: str
    delta: float
    converged: bool
    iterations: int
    distance: float
    stable: bool


class AssessmentSummary(_Model):
    stable: bool
    dominant: bool
    winning: bool
    lose_battle_win_war: bool
    winning_checks: Dict[str, bool] = Field(default_factory=dict)
    dominance_checks: Dict[str, bool] = Field(default_factory=dict)
    attacker_best: Dict[str, float] = Field(default_factory=dict)
    deviations: Dict[str, float] = Field(default_factory=dict)
    shocks: List[ShockResult] = Field(default_factory=list)


class Report(_Model):
    schema_version: int = 1
    run: RunInfo
    policy: PolicySummary
    strategic: StrategicSummary
    operations: List[OperationSummary]
    tactical: List[TacticalSummary]
    payoffs: List[EchelonRow]
    trace: TraceSummary
    hylomorphism: Dict[str, float] = Field(default_factory=dict)
    slack: Optional[float] = None
    assessment: Optional[AssessmentSummary] = None
    diagnostics: List[str] = Field(default_factory=list)


# --- Construction --- #


def _assessment(verdicts):
    ev = verdicts.evidence
    dom = ev.get("dominance", {})
    return AssessmentSummary(
        stable=verdicts.stable,
        dominant=verdicts.dominant,
        winning=verdicts.winning,
        lose_battle_win_war=verdicts.lose_battle_win_war,
        winning_checks=ev.get("winning", {}),
        dominance_checks=dom.get("checks", {}),
        attacker_best=dom.get("attacker_best", {}),
        deviations=dom.get("deviations", {}),
        shocks=[ShockResult(**s) for s in ev.get("shocks", [])],
    )


def build_report(scenario, config, trace, damping, tolerance, max_iter, hylo=None,
                 verdicts=None, timings=None, version="0.1.0"):
    strat = config.strategic
    ops = strat.operations
    report = Report(
        run=RunInfo(scenario=scenario.metadata.name, version=version,
                    seed=scenario.solver.seed, damping=damping, tolerance=tolerance,
                    max_iter=max_iter, timings=timings or {}),
        policy=PolicySummary(budget=config.policy.budget,
                             weights=dict(zip(ops, map(float, config.policy.weights)))),
        strategic=StrategicSummary(
            value_d=strat.value_d, value_a=strat.value_a,
            exploitability=strat.exploitability, grid_step=strat.grid_step,
            mean_allocation_d=dict(zip(ops, map(float, strat.mean_allocation_d))),
            mean_allocation_a=dict(zip(ops, map(float, strat.mean_allocation_a)))),
        operations=[
            OperationSummary(operation=op, deception=config.games[op].deception_index,
                             actions_d=list(config.games[op].actions_d),
                             actions_a=list(config.games[op].actions_a),
                             value_d=sol.cumulative_value_d, value_a=sol.cumulative_value_a,
                             f=config.feedback[op][0], anchor=config.feedback[op][1])
            for op, sol in config.operational.items()],
        tactical=[
            TacticalSummary(operation=op, action_d=a_d, action_a=a_a, xi_d=str(out.xi_d),
                            xi_a=str(out.xi_a), U_dT=out.U_dT, U_aT=out.U_aT)
            for (op, a_d, a_a), out in config.tactical.items()],
        payoffs=[EchelonRow(echelon=e, payoff_d=config.payoffs.d[e], payoff_a=config.payoffs.a[e])
                 for e in ECHELONS],
        trace=TraceSummary(converged=trace.converged, iterations=trace.iterations,
                           final_residual=trace.final_residual,
                           residuals=[float(r) for r in trace.residuals]),
        diagnostics=list(config.diagnostics),
    )
    if hylo is not None:
        report.hylomorphism = dict(hylo.residuals)
        report.slack = hylo.slack
    if verdicts is not None:
        report.assessment = _assessment(verdicts)

    return report


# --- Rendering --- #


def _table(rows, columns):
    if not rows:
        return "  (none)"
    return pd.DataFrame(rows, columns=columns).to_string(index=False, float_format="%.6g")


def _human(report):
    t = report.trace
    lines = ["Scenario: %s (cwtoolkit %s)" % (report.run.scenario, report.run.version),
             "Converged: %s after %d iterations (final residual %.3e)"
             % (str(t.converged).lower(), t.iterations, t.final_residual),
             "Residual tail: " + ", ".join("%.3e" % r for r in t.residuals[-TAIL:]),
             "",
             "Policy budget: %.6g" % report.policy.budget,
             _table([(op, w) for op, w in report.policy.weights.items()],
                    ["operation", "weight"]),
             "",
             "Echelon payoffs:",
             _table([(r.echelon, r.payoff_d, r.payoff_a) for r in report.payoffs],
                    ["echelon", "defender", "attacker"]),
             "",
             "Strategic value %.6g (exploitability %.3e)"
             % (report.strategic.value_d, report.strategic.exploitability),
             _table([(op, report.strategic.mean_allocation_d[op],
                      report.strategic.mean_allocation_a[op])
                     for op in report.strategic.mean_allocation_d],
                    ["operation", "mean r_d", "mean r_a"]),
             "",
             "Operations:",
             _table([(o.operation, o.deception, o.value_d, o.f, o.anchor)
                     for o in report.operations],
                    ["operation", "deception", "value_d", "f", "anchor"]),
             "",
             "Tactical encounters:",
             _table([(x.operation, x.action_d, x.action_a, x.xi_d, x.xi_a, x.U_dT, x.U_aT)
                     for x in report.tactical],
                    ["operation", "a_d", "a_a", "xi_d", "xi_a", "U_dT", "U_aT"])]

    if report.hylomorphism:
        lines += ["", "Hylomorphism residuals (slack %.3e):" % report.slack,
                  _table(list(report.hylomorphism.items()), ["pair", "residual"])]

    a = report.assessment
    if a is not None:
        lines += ["", "Assessment:",
                  "  stable: %s" % str(a.stable).lower(),
                  "  dominant: %s" % str(a.dominant).lower(),
                  "  winning: %s" % str(a.winning).lower()]
        if a.lose_battle_win_war:
            lines.append("  lose-battle-win-war: true")
        if a.shocks:
            lines.append(_table([(s.name, s.converged, s.distance, s.stable) for s in a.shocks],
                                ["shock", "converged", "distance", "stable"]))

    if report.diagnostics:
        lines += ["", "Diagnostics:"] + ["  " + d for d in report.diagnostics]

    return "\n".join(lines) + "\n"


def emit_report(report, fmt="machine"):
    if fmt == "machine":
        return json.dumps(report.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"
    if fmt == "human_text":
        return _human(report)

    raise ValueError("unknown report format %r (expected one of %s)" % (fmt, FORMATS))


def parse_report(text):
    """Machine report back into a Report."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(err.msg, err.lineno, err.colno) from err
    try:
        return Report.model_validate(data)
    except pydantic.ValidationError as err:
        first = err.errors()[0]
        raise ScenarioValidationError(".".join(str(p) for p in first["loc"]),
                                      first["msg"]) from err
