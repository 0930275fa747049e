"""
Scenario documents: schema, validation, canonical JSON and compilation.

A scenario describes one campaign: the coalition behind the defender, the
operations contested at the strategic level, one stochastic-game template
per operation (with deception mechanisms wiring in kernels and context
payoffs), tactic catalogs with feasibility tables, the technology level,
thresholds, shock and deviation sets, and solver settings.

Example:
    scn = load_scenario('campaign.json')     # or '@redcyber' for built-ins
    text = emit_scenario(scn)
    parse_scenario(text) == scn              # True

Notes:
    Pydantic checks field types and ranges; check_scenario() then checks
    cross references (operations, states, actions, tactics). Both report a
    ScenarioValidationError(path, rule).

"""
import json
import os
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
import pydantic
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..errors import ParseError, ScenarioValidationError
from ..operational import MAX_HORIZON
from ..policy import BudgetRule, CoalitionGame
from ..strategic import MAX_OPS, ContestSpec
from ..tactical import IDLE, FeasibilityRule, TacticCatalog
from ..technical import ECHELONS, TechLevel

SCHEMA_VERSION = 1
WILDCARD = "*"
TOLERANCE = 1e-9


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


# --- Sections --- #


class Metadata(_Model):
    name: str
    description: str = ""


class CoalitionValue(_Model):
    members: List[str]
    value: float


class SynergyRule(_Model):
    members: List[str] = Field(min_length=1)
    bonus: float


class CoalitionSection(_Model):
    players: List[str] = Field(min_length=1, max_length=16)
    defender: str
    standalone: Dict[str, float] = Field(default_factory=dict)
    synergy: List[SynergyRule] = Field(default_factory=list)
    values: List[CoalitionValue] = Field(default_factory=list)
    budget_rule: BudgetRule = Field(default_factory=BudgetRule)
    value_unit: float = Field(1.0, gt=0)


class StrategicSection(_Model):
    operations: List[str] = Field(min_length=1, max_length=MAX_OPS)
    base_weights: Dict[str, float]
    attacker_budget: float = Field(ge=0)
    contests: Dict[str, ContestSpec] = Field(default_factory=dict)
    grid_step: float = Field(1.0, gt=0)
    allow_slack: bool = False
    payoff_range: Tuple[float, float] = (0.0, 1.0)
    payoff_ranges: Dict[str, Tuple[float, float]] = Field(default_factory=dict)
    weight_rate: float = Field(0.0, ge=0, le=1)
    method: Literal["exact_lp", "fictitious_play"] = "exact_lp"
    apply_feedback: bool = True


class ActionSpec(_Model):
    name: str
    cost: float = Field(0.0, ge=0)


class TransitionEntry(_Model):
    state: str
    action_d: str = WILDCARD
    action_a: str = WILDCARD
    next: Dict[str, float]


class Mechanism(_Model):
    """Deception mechanism: transition kernel and context payoff."""

    transition: List[TransitionEntry] = Field(default_factory=list)
    context_payoff: float = 0.0


class OperationTemplate(_Model):
    horizon: int = Field(ge=1, le=MAX_HORIZON)
    stage_labels: List[str] = Field(default_factory=list)
    states: List[str] = Field(min_length=1)
    initial_state: str
    actions_d: List[ActionSpec] = Field(min_length=1)
    actions_a: List[str] = Field(min_length=1)
    state_payoff: Dict[str, float] = Field(default_factory=dict)
    deception: str
    mechanisms: Dict[str, Mechanism]
    general_sum: bool = False


class PairPayoff(_Model):
    tactic_d: str
    tactic_a: str
    payoff: Tuple[float, float]


class CatalogSpec(_Model):
    tactics_d: List[str] = Field(min_length=1)
    tactics_a: List[str] = Field(min_length=1)
    pair_payoffs: List[PairPayoff]
    step_discount: float = Field(1.0, gt=0, le=1)
    idle_payoff: Tuple[float, float] = (0.0, 0.0)


class RuleSpec(_Model):
    action_d: str
    action_a: str
    allowed_d: List[str] = Field(min_length=1)
    allowed_a: List[str] = Field(min_length=1)
    max_len_d: int = Field(1, ge=1)
    max_len_a: int = Field(1, ge=1)
    repetition: Literal["allowed", "forbidden"] = "forbidden"


class FeasibilityTable(_Model):
    catalog: str
    rules: List[RuleSpec] = Field(default_factory=list)


class TacticalSection(_Model):
    catalogs: Dict[str, CatalogSpec] = Field(default_factory=dict)
    # operation -> table
    feasibility: Dict[str, FeasibilityTable] = Field(default_factory=dict)


class Thresholds(_Model):
    """Viability thresholds per echelon; missing entries are unbounded."""

    theta_d: Dict[str, float] = Field(default_factory=dict)
    theta_a: Dict[str, float] = Field(default_factory=dict)
    winning_echelons: List[str] = Field(default_factory=lambda: ["policy"])

    @field_validator("winning_echelons")
    @classmethod
    def _policy_in_scope(cls, v):
        if "policy" not in v:
            raise ValueError("winning_echelons must contain 'policy'")
        unknown = set(v) - set(ECHELONS)
        if unknown:
            raise ValueError("unknown echelons %s" % sorted(unknown))
        return v


class PerturbationSpec(_Model):
    site: str
    delta: float
    name: str = ""


class DeviationSpec(_Model):
    """Finite attacker adaptation checked by the dominance verdict."""

    name: str
    echelon: Literal["strategic", "operational", "tactical"]
    operation: Optional[str] = None
    allocation: Dict[str, float] = Field(default_factory=dict)
    budget: Optional[float] = None
    action: Optional[str] = None
    action_d: Optional[str] = None
    action_a: Optional[str] = None
    sequence: List[str] = Field(default_factory=list)


class SolverSettings(_Model):
    damping: float = Field(0.5, gt=0, le=1)
    tolerance: float = Field(1e-6, gt=0)
    max_iter: int = Field(200, ge=1)
    seed: int = 0
    trajectories: int = Field(1, ge=1)
    stability_tolerance: float = Field(1e-3, gt=0)
    selection: Literal["defender_optimal", "attacker_optimal", "welfare", "first"] = \
        "defender_optimal"
    n_jobs: int = 1
    fp_iterations: int = Field(10000, ge=1)


class Scenario(_Model):
    schema_version: Literal[1] = SCHEMA_VERSION
    metadata: Metadata
    coalition: CoalitionSection
    strategic: StrategicSection
    operational: Dict[str, OperationTemplate]
    tactical: TacticalSection = Field(default_factory=TacticalSection)
    tech: TechLevel = Field(default_factory=TechLevel)
    thresholds: Thresholds = Field(default_factory=Thresholds)
    shock_sets: Dict[str, List[PerturbationSpec]] = Field(default_factory=dict)
    deviations: List[DeviationSpec] = Field(default_factory=list)
    solver: SolverSettings = Field(default_factory=SolverSettings)

    @property
    def operations(self):
        return tuple(self.strategic.operations)


# --- Cross-reference checks --- #


def _fail(path, rule):
    raise ScenarioValidationError(path, rule)


def _check_coalition(c):
    players = set(c.players)
    if len(players) != len(c.players):
        _fail("coalition.players", "player identifiers must be unique")
    if c.defender not in players:
        _fail("coalition.defender", "unknown player '%s'" % c.defender)
    for name in c.standalone:
        if name not in players:
            _fail("coalition.standalone", "unknown player '%s'" % name)
    for i, rule in enumerate(c.synergy):
        for name in rule.members:
            if name not in players:
                _fail("coalition.synergy[%d].members" % i, "unknown player '%s'" % name)
    for i, entry in enumerate(c.values):
        for name in entry.members:
            if name not in players:
                _fail("coalition.values[%d].members" % i, "unknown player '%s'" % name)
        if not entry.members and entry.value != 0:
            _fail("coalition.values[%d]" % i, "v(empty set) must be 0")


def _check_strategic(s):
    ops = s.operations
    if len(set(ops)) != len(ops):
        _fail("strategic.operations", "operation identifiers must be unique")
    if set(s.base_weights) != set(ops):
        _fail("strategic.base_weights", "weights must be given for exactly the operations")
    w = np.array([s.base_weights[op] for op in ops])
    if np.any(w < 0) or abs(w.sum() - 1.0) > TOLERANCE:
        _fail("strategic.base_weights", "weights must lie on the simplex")
    for op in s.contests:
        if op not in ops:
            _fail("strategic.contests", "unknown operation '%s'" % op)
    units = s.attacker_budget / s.grid_step
    if abs(units - round(units)) > TOLERANCE:
        _fail("strategic.attacker_budget", "must be a multiple of grid_step")
    for path, rng in [("strategic.payoff_range", s.payoff_range)] + [
            ("strategic.payoff_ranges.%s" % op, r) for op, r in s.payoff_ranges.items()]:
        if not rng[0] < rng[1]:
            _fail(path, "range lower bound must be below upper bound")
    for op in s.payoff_ranges:
        if op not in ops:
            _fail("strategic.payoff_ranges", "unknown operation '%s'" % op)


def _check_template(op, t):
    path = "operational.%s" % op
    states = set(t.states)
    names_d = [a.name for a in t.actions_d]
    if len(states) != len(t.states):
        _fail(path + ".states", "state identifiers must be unique")
    if len(set(names_d)) != len(names_d) or len(set(t.actions_a)) != len(t.actions_a):
        _fail(path + ".actions", "action identifiers must be unique")
    if t.initial_state not in states:
        _fail(path + ".initial_state", "unknown state '%s'" % t.initial_state)
    if t.stage_labels and len(t.stage_labels) != t.horizon:
        _fail(path + ".stage_labels", "one label per stage required")
    for name in t.state_payoff:
        if name not in states:
            _fail(path + ".state_payoff", "unknown state '%s'" % name)
    if t.deception not in t.mechanisms:
        _fail(path + ".deception", "unknown mechanism '%s'" % t.deception)
    for mech_name, mech in t.mechanisms.items():
        for entry in mech.transition:
            where = "%s.transition" % path
            if entry.state not in states:
                _fail(where, "unknown state '%s' (mechanism %s)" % (entry.state, mech_name))
            if entry.action_d != WILDCARD and entry.action_d not in names_d:
                _fail(where, "unknown defender action '%s'" % entry.action_d)
            if entry.action_a != WILDCARD and entry.action_a not in t.actions_a:
                _fail(where, "unknown attacker action '%s'" % entry.action_a)
            for name, p in entry.next.items():
                if name not in states:
                    _fail(where, "unknown successor state '%s'" % name)
                if p < 0:
                    _fail(where, "negative probability")
            total = sum(entry.next.values())
            if abs(total - 1.0) > TOLERANCE:
                _fail(where, "row (%s, %s, %s) of mechanism %s sums to %.12g, not 1"
                      % (entry.state, entry.action_d, entry.action_a, mech_name, total))


def _check_tactical(scn):
    tac = scn.tactical
    for cid, cat in tac.catalogs.items():
        path = "tactical.catalogs.%s.pair_payoffs" % cid
        seen = set()
        for entry in cat.pair_payoffs:
            if entry.tactic_d not in cat.tactics_d:
                _fail(path, "unknown tactic '%s'" % entry.tactic_d)
            if entry.tactic_a not in cat.tactics_a:
                _fail(path, "unknown tactic '%s'" % entry.tactic_a)
            seen.add((entry.tactic_d, entry.tactic_a))
        if len(seen) != len(cat.tactics_d) * len(cat.tactics_a):
            _fail(path, "pair payoffs must cover every tactic pair")

    for op, table in tac.feasibility.items():
        path = "tactical.feasibility.%s" % op
        if op not in scn.operational:
            _fail(path, "unknown operation '%s'" % op)
        if table.catalog not in tac.catalogs:
            _fail(path + ".catalog", "unknown catalog '%s'" % table.catalog)
        cat = tac.catalogs[table.catalog]
        tmpl = scn.operational[op]
        names_d = [a.name for a in tmpl.actions_d]
        for i, rule in enumerate(table.rules):
            where = "%s.rules[%d]" % (path, i)
            if rule.action_d not in names_d:
                _fail(where + ".action_d", "unknown defender action '%s'" % rule.action_d)
            if rule.action_a not in tmpl.actions_a:
                _fail(where + ".action_a", "unknown attacker action '%s'" % rule.action_a)
            for t in rule.allowed_d:
                if t != IDLE and t not in cat.tactics_d:
                    _fail(where + ".allowed_d", "unknown tactic '%s'" % t)
            for t in rule.allowed_a:
                if t != IDLE and t not in cat.tactics_a:
                    _fail(where + ".allowed_a", "unknown tactic '%s'" % t)


def check_scenario(scn):
    """Cross-reference validation; raises ScenarioValidationError."""
    from ..meta.perturb import parse_site

    _check_coalition(scn.coalition)
    _check_strategic(scn.strategic)
    for op in scn.strategic.operations:
        if op not in scn.operational:
            _fail("operational.%s" % op, "operation has no stochastic-game template")
    for op, tmpl in scn.operational.items():
        if op not in scn.strategic.operations:
            _fail("operational.%s" % op, "template for undeclared operation")
        _check_template(op, tmpl)
    _check_tactical(scn)

    for echelon in list(scn.tech.action_mask_d) + list(scn.tech.action_mask_a):
        if echelon not in ECHELONS:
            _fail("tech.action_mask", "unknown echelon '%s'" % echelon)
    for echelon in list(scn.thresholds.theta_d) + list(scn.thresholds.theta_a):
        if echelon not in ECHELONS:
            _fail("thresholds", "unknown echelon '%s'" % echelon)

    for name, shocks in scn.shock_sets.items():
        for i, shock in enumerate(shocks):
            try:
                parse_site(shock.site, scn)
            except ValueError as err:
                _fail("shock_sets.%s[%d].site" % (name, i), str(err))

    for i, dev in enumerate(scn.deviations):
        if dev.echelon != "strategic" and dev.operation not in scn.operational:
            _fail("deviations[%d].operation" % i, "unknown operation '%s'" % dev.operation)
        for op in dev.allocation:
            if op not in scn.strategic.operations:
                _fail("deviations[%d].allocation" % i, "unknown operation '%s'" % op)

    return scn


# --- Text form --- #


def parse_scenario(text):
    """Parse and validate a JSON scenario document."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(err.msg, err.lineno, err.colno) from err

    try:
        scn = Scenario.model_validate(data)
    except pydantic.ValidationError as err:
        first = err.errors()[0]
        path = ".".join(str(p) for p in first["loc"]) or "<document>"
        raise ScenarioValidationError(path, first["msg"]) from err

    return check_scenario(scn)


def emit_scenario(scn):
    """Canonical JSON text (sorted keys, two-space indent)."""
    return json.dumps(scn.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def load_scenario(path):
    """Read a scenario file; '@name' selects a built-in scenario."""
    if path.startswith("@"):
        from .fixtures import builtin

        return builtin(path[1:])

    with open(os.path.expanduser(path)) as f:
        return parse_scenario(f.read())


# --- Compilation into solver objects --- #


def coalition_game(scn):
    c = scn.coalition
    index = {p: i for i, p in enumerate(c.players)}
    standalone = [c.standalone.get(p, 0.0) for p in c.players]
    synergy = [([index[m] for m in rule.members], rule.bonus) for rule in c.synergy]
    overrides = {tuple(index[m] for m in e.members): e.value for e in c.values}

    return CoalitionGame.from_rules(len(c.players), standalone, synergy, overrides)


def defender_index(scn):
    return scn.coalition.players.index(scn.coalition.defender)


def base_weights(scn):
    return np.array([scn.strategic.base_weights[op] for op in scn.operations])


def contests(scn):
    return tuple(scn.strategic.contests.get(op, ContestSpec()) for op in scn.operations)


def payoff_range(scn, op):
    return scn.strategic.payoff_ranges.get(op, scn.strategic.payoff_range)


def tactic_catalog(scn, cid):
    cat = scn.tactical.catalogs[cid]
    pairs = {(e.tactic_d, e.tactic_a): tuple(e.payoff) for e in cat.pair_payoffs}

    return TacticCatalog(cat.tactics_d, cat.tactics_a, pairs, cat.step_discount,
                         tuple(cat.idle_payoff))


def rule_table(scn, op):
    """(catalog id or None, {(a_d, a_a): FeasibilityRule})"""
    table = scn.tactical.feasibility.get(op)
    if table is None:
        return None, {}
    rules = {(r.action_d, r.action_a): FeasibilityRule(r.allowed_d, r.allowed_a, r.max_len_d,
                                                       r.max_len_a, r.repetition)
             for r in table.rules}

    return table.catalog, rules


def transition_array(tmpl, actions_d, actions_a, mechanism=None):
    """(S, A_d, A_a, S) kernel of a template restricted to the given actions.

    Specific entries beat wildcards; undeclared rows stay in place.
    """
    mech = tmpl.mechanisms[mechanism or tmpl.deception]
    states = tmpl.states
    sidx = {s: i for i, s in enumerate(states)}
    T = np.zeros((len(states), len(actions_d), len(actions_a), len(states)))
    for s in range(len(states)):
        T[s, :, :, s] = 1.0

    def rank(entry):
        return (entry.action_d != WILDCARD) + (entry.action_a != WILDCARD)

    for entry in sorted(mech.transition, key=rank):
        row = np.zeros(len(states))
        for name, p in entry.next.items():
            row[sidx[name]] = p
        for i, a_d in enumerate(actions_d):
            if entry.action_d not in (WILDCARD, a_d):
                continue
            for j, a_a in enumerate(actions_a):
                if entry.action_a in (WILDCARD, a_a):
                    T[sidx[entry.state], i, j] = row

    return T
