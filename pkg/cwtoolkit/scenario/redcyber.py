"""
RedCyber: a stage-structured campaign against national infrastructure.

ALL NUMBERS IN THIS MODULE ARE ILLUSTRATIVE FIXTURE VALUES. The campaign
structure (phases, stage timeline, deception mechanisms, technology
levers) is the modelled content; payoffs, probabilities and budgets only
make the scenario solvable and must not be read as measured data.

Technology levers:
    detection latency  -> tech.context_payoff_shift (negative = slower)
    operating cost     -> tech.cost_factor

Framing gap: reconnaissance is a signalling game with evidence and
escalation a leader-follower game in the campaign narrative. Both are
encoded here with the stochastic-game and bimatrix machinery (simultaneous
moves at every stage); no signalling or commitment solver is implied.

"""
from .schema import Scenario, check_scenario

OPERATIONS = ("reconnaissance", "disruption", "escalation", "sustained_assault",
              "strategic_messaging")
STAGE_LABELS = ("Policy & Preparation (k=0)", "Reconnaissance (k1)", "Initial Disruption (k2)",
                "Escalation (k3)", "Sustained Operations")
MECHANISMS = ("honeypots", "decoy_credentials", "canaries", "tarpits")

HEADER = ("Illustrative fixture values only. Phases follow the campaign timeline; "
          "reconnaissance (signalling with evidence) and escalation (leader-follower) "
          "are encoded as simultaneous-move stochastic games. Levers: detection latency "
          "-> tech.context_payoff_shift, operating cost -> tech.cost_factor.")


def _row(state, nxt, action_d="*", action_a="*"):
    return {"state": state, "action_d": action_d, "action_a": action_a, "next": nxt}


def _intrusion_catalog():
    return {
        "tactics_d": ["isolate", "monitor"],
        "tactics_a": ["exploit", "phish"],
        "pair_payoffs": [
            {"tactic_d": "isolate", "tactic_a": "exploit", "payoff": [0.5, -0.5]},
            {"tactic_d": "isolate", "tactic_a": "phish", "payoff": [0.2, 0.1]},
            {"tactic_d": "monitor", "tactic_a": "exploit", "payoff": [-0.3, 0.4]},
            {"tactic_d": "monitor", "tactic_a": "phish", "payoff": [0.1, 0.3]},
        ],
        "idle_payoff": [-0.1, 0.0],
    }


def _deception_catalog():
    pay = {
        ("deploy_decoy", "lateral_move"): (0.6, -0.4),
        ("deploy_decoy", "credential_dump"): (0.1, 0.2),
        ("deploy_decoy", "exfiltrate"): (-0.2, 0.5),
        ("rotate_credentials", "lateral_move"): (0.0, 0.3),
        ("rotate_credentials", "credential_dump"): (0.5, -0.3),
        ("rotate_credentials", "exfiltrate"): (0.1, 0.2),
        ("sinkhole", "lateral_move"): (-0.1, 0.2),
        ("sinkhole", "credential_dump"): (0.0, 0.1),
        ("sinkhole", "exfiltrate"): (0.6, -0.5),
    }
    return {
        "tactics_d": ["deploy_decoy", "rotate_credentials", "sinkhole"],
        "tactics_a": ["lateral_move", "credential_dump", "exfiltrate"],
        "pair_payoffs": [{"tactic_d": d, "tactic_a": a, "payoff": list(p)}
                         for (d, a), p in pay.items()],
        "step_discount": 0.9,
    }


def _rules(table, catalog):
    return {"catalog": catalog, "rules": [
        dict({"action_d": a_d, "action_a": a_a}, **rule) for (a_d, a_a), rule in table.items()]}


# --- Flagship --- #


def _staged(states, initial, actions_d, actions_a, payoff, deception, mechanisms):
    return {
        "horizon": len(STAGE_LABELS),
        "stage_labels": list(STAGE_LABELS),
        "states": states,
        "initial_state": initial,
        "actions_d": [{"name": n, "cost": c} for n, c in actions_d],
        "actions_a": actions_a,
        "state_payoff": payoff,
        "deception": deception,
        "mechanisms": mechanisms,
    }


def redcyber_scenario():
    """Flagship five-phase campaign."""
    ops = {
        "reconnaissance": _staged(
            ["quiet", "probed", "mapped"], "quiet",
            [("baseline", 0.0), ("deploy_honeypots", 0.1), ("threat_hunt", 0.3)],
            ["scan", "spearphish"],
            {"quiet": 0.4, "probed": 0.0, "mapped": -0.6},
            "honeypots",
            {"honeypots": {"context_payoff": 0.2, "transition": [
                _row("quiet", {"quiet": 0.7, "probed": 0.3}),
                _row("quiet", {"quiet": 0.5, "probed": 0.4, "mapped": 0.1}, action_a="spearphish"),
                _row("probed", {"quiet": 0.3, "probed": 0.5, "mapped": 0.2}),
                _row("probed", {"quiet": 0.6, "probed": 0.4}, action_d="deploy_honeypots"),
                _row("mapped", {"probed": 0.2, "mapped": 0.8}),
                _row("mapped", {"quiet": 0.3, "probed": 0.4, "mapped": 0.3},
                     action_d="threat_hunt")]},
             "canaries": {"context_payoff": 0.1, "transition": [
                _row("quiet", {"quiet": 0.6, "probed": 0.4}),
                _row("probed", {"quiet": 0.4, "probed": 0.4, "mapped": 0.2}),
                _row("mapped", {"probed": 0.3, "mapped": 0.7})]}}),
        "disruption": _staged(
            ["operational", "degraded", "down"], "operational",
            [("baseline", 0.0), ("segment", 0.2)],
            ["ddos", "wiper"],
            {"operational": 0.5, "degraded": -0.2, "down": -1.0},
            "tarpits",
            {"tarpits": {"context_payoff": 0.1, "transition": [
                _row("operational", {"operational": 0.8, "degraded": 0.2}),
                _row("operational", {"operational": 0.6, "degraded": 0.3, "down": 0.1},
                     action_a="wiper"),
                _row("degraded", {"operational": 0.4, "degraded": 0.4, "down": 0.2}),
                _row("degraded", {"operational": 0.7, "degraded": 0.3}, action_d="segment"),
                _row("down", {"degraded": 0.5, "down": 0.5})]}}),
        "escalation": _staged(
            ["contained", "escalating"], "contained",
            [("baseline", 0.0), ("signal_resolve", 0.1)],
            ["escalate", "hold"],
            {"contained": 0.3, "escalating": -0.8},
            "canaries",
            {"canaries": {"context_payoff": 0.15, "transition": [
                _row("contained", {"contained": 0.9, "escalating": 0.1}, action_a="hold"),
                _row("contained", {"contained": 0.5, "escalating": 0.5}, action_a="escalate"),
                _row("contained", {"contained": 0.8, "escalating": 0.2},
                     action_d="signal_resolve", action_a="escalate"),
                _row("escalating", {"contained": 0.3, "escalating": 0.7})]}}),
        "sustained_assault": _staged(
            ["resilient", "strained"], "resilient",
            [("baseline", 0.0), ("rotate_credentials", 0.15)],
            ["persist", "pause"],
            {"resilient": 0.2, "strained": -0.5},
            "decoy_credentials",
            {"decoy_credentials": {"context_payoff": 0.25, "transition": [
                _row("resilient", {"resilient": 0.7, "strained": 0.3}),
                _row("resilient", {"resilient": 0.9, "strained": 0.1}, action_a="pause"),
                _row("strained", {"resilient": 0.4, "strained": 0.6}),
                _row("strained", {"resilient": 0.6, "strained": 0.4},
                     action_d="rotate_credentials")]},
             "tarpits": {"context_payoff": 0.1, "transition": [
                _row("resilient", {"resilient": 0.75, "strained": 0.25}),
                _row("strained", {"resilient": 0.5, "strained": 0.5})]}}),
        "strategic_messaging": _staged(
            ["credible", "doubted"], "credible",
            [("baseline", 0.0), ("attribute", 0.05)],
            ["disinform", "silent"],
            {"credible": 0.3, "doubted": -0.3},
            "canaries",
            {"canaries": {"context_payoff": 0.05, "transition": [
                _row("credible", {"credible": 0.8, "doubted": 0.2}),
                _row("credible", {"credible": 0.6, "doubted": 0.4}, action_a="disinform"),
                _row("doubted", {"credible": 0.5, "doubted": 0.5}, action_d="attribute"),
                _row("doubted", {"credible": 0.2, "doubted": 0.8})]}}),
    }

    full_intrusion = {"allowed_d": ["isolate", "monitor"], "allowed_a": ["exploit", "phish"]}
    full_deception = {"allowed_d": ["deploy_decoy", "rotate_credentials", "sinkhole"],
                      "allowed_a": ["lateral_move", "credential_dump", "exfiltrate"]}
    feasibility = {
        "reconnaissance": _rules({
            ("deploy_honeypots", "scan"): full_deception,
            ("deploy_honeypots", "spearphish"): dict(full_deception, max_len_a=2),
            ("threat_hunt", "spearphish"): dict(full_deception, max_len_d=2),
            ("baseline", "spearphish"): {"allowed_d": ["sinkhole"],
                                         "allowed_a": ["credential_dump", "exfiltrate"]},
        }, "deception"),
        "disruption": _rules({
            ("segment", "ddos"): full_intrusion,
            ("segment", "wiper"): dict(full_intrusion, max_len_d=2),
            ("baseline", "wiper"): {"allowed_d": ["monitor"], "allowed_a": ["exploit", "phish"]},
        }, "intrusion"),
        "sustained_assault": _rules({
            ("rotate_credentials", "persist"): full_deception,
            ("baseline", "persist"): {"allowed_d": ["deploy_decoy", "sinkhole"],
                                      "allowed_a": ["lateral_move", "exfiltrate"]},
        }, "deception"),
    }

    return check_scenario(Scenario.model_validate({
        "metadata": {"name": "redcyber", "description": HEADER},
        "coalition": {
            "players": ["national_cert", "isp_consortium", "allied_agency"],
            "defender": "national_cert",
            "standalone": {"national_cert": 0.2, "isp_consortium": 0.15, "allied_agency": 0.1},
            "synergy": [{"members": ["national_cert", "isp_consortium"], "bonus": 0.2},
                        {"members": ["national_cert", "allied_agency"], "bonus": 0.15},
                        {"members": ["isp_consortium", "allied_agency"], "bonus": 0.05}],
            "budget_rule": {"base": 3.0, "scale": 2.0},
        },
        "strategic": {
            "operations": list(OPERATIONS),
            "base_weights": {"reconnaissance": 0.15, "disruption": 0.3, "escalation": 0.2,
                             "sustained_assault": 0.25, "strategic_messaging": 0.1},
            "attacker_budget": 4.0,
            "contests": {"disruption": {"kind": "lottery", "sharpness": 1.5},
                         "escalation": {"kind": "winner_take_all"}},
            "payoff_range": [-5.0, 5.0],
            "weight_rate": 0.3,
        },
        "operational": ops,
        "tactical": {"catalogs": {"intrusion": _intrusion_catalog(),
                                  "deception": _deception_catalog()},
                     "feasibility": feasibility},
        "tech": {"context_payoff_shift": 0.0, "cost_factor": 1.0},
        "thresholds": {"theta_d": {"policy": 0.3, "strategic": 0.45, "tactical": 0.0},
                       "theta_a": {"policy": 0.6},
                       "winning_echelons": ["policy", "strategic"]},
        "shock_sets": {
            "levers": [{"name": "slower detection", "site": "tech.context_payoff_shift",
                        "delta": -0.1},
                       {"name": "costlier operations", "site": "tech.cost_factor",
                        "delta": 0.5}],
            "policy": [{"name": "budget cut", "site": "policy.budget", "delta": -1.0}],
        },
        "deviations": [
            {"name": "all-in disruption", "echelon": "strategic",
             "allocation": {"disruption": 4.0}},
            {"name": "relentless wiper", "echelon": "operational", "operation": "disruption",
             "action": "wiper"},
        ],
        "solver": {"damping": 0.5, "tolerance": 1e-6, "max_iter": 200, "seed": 2024,
                   "trajectories": 16},
    }))


# --- Reduced campaign --- #


def redcyber_small_scenario():
    """Three phases, at most three states and three stages each.

    Costs are zero and the defender budget stays inside one grid cell, so
    the allocation game keeps a strict saddle point throughout the search.
    """
    def template(horizon, states, payoff, deception, context, transition):
        return {
            "horizon": horizon,
            "stage_labels": list(STAGE_LABELS[1:1 + horizon]),
            "states": states,
            "initial_state": states[0],
            "actions_d": [{"name": "harden"}, {"name": "observe"}],
            "actions_a": ["scan", "strike"],
            "state_payoff": payoff,
            "deception": deception,
            "mechanisms": {deception: {"context_payoff": context, "transition": transition}},
        }

    ops = {
        "reconnaissance": template(3, ["quiet", "probed", "breached"],
                                   {"quiet": 0.5, "probed": 0.0, "breached": -1.0},
                                   "honeypots", 0.2, [
            _row("quiet", {"quiet": 0.6, "probed": 0.4}),
            _row("probed", {"quiet": 0.5, "probed": 0.3, "breached": 0.2}, action_d="harden"),
            _row("probed", {"probed": 0.5, "breached": 0.5}, action_d="observe"),
            _row("breached", {"probed": 0.3, "breached": 0.7})]),
        "disruption": template(2, ["up", "degraded"], {"up": 0.3, "degraded": -0.5},
                               "tarpits", 0.1, [
            _row("up", {"up": 0.7, "degraded": 0.3}),
            _row("degraded", {"up": 0.6, "degraded": 0.4}, action_d="harden"),
            _row("degraded", {"degraded": 1.0}, action_d="observe")]),
        "escalation": template(1, ["contested"], {"contested": -0.2}, "canaries", 0.3, []),
    }

    rules = {
        ("harden", "scan"): {"allowed_d": ["isolate", "monitor"],
                             "allowed_a": ["exploit", "phish"]},
        ("harden", "strike"): {"allowed_d": ["isolate", "monitor"], "allowed_a": ["exploit"]},
        ("observe", "scan"): {"allowed_d": ["monitor"], "allowed_a": ["exploit", "phish"]},
        ("observe", "strike"): {"allowed_d": ["isolate", "monitor"],
                                "allowed_a": ["exploit", "phish"], "max_len_d": 2},
    }

    return check_scenario(Scenario.model_validate({
        "metadata": {"name": "redcyber-small", "description": HEADER},
        "coalition": {
            "players": ["blue_team", "allied_cert"],
            "defender": "blue_team",
            "values": [{"members": ["blue_team", "allied_cert"], "value": 1.0},
                       {"members": ["allied_cert"], "value": 0.6}],
            "budget_rule": {"base": 3.25, "scale": 0.5},
        },
        "strategic": {
            "operations": ["reconnaissance", "disruption", "escalation"],
            "base_weights": {"reconnaissance": 0.4, "disruption": 0.35, "escalation": 0.25},
            "attacker_budget": 3.0,
            "payoff_ranges": {"reconnaissance": [-2.8, 7.2], "disruption": [-2.0, 6.0],
                              "escalation": [-1.0, 2.0]},
            "weight_rate": 0.5,
        },
        "operational": ops,
        "tactical": {"catalogs": {"intrusion": _intrusion_catalog()},
                     "feasibility": {op: _rules(rules, "intrusion") for op in ops}},
        "thresholds": {"theta_d": {"policy": 0.3, "tactical": 0.0},
                       "theta_a": {"policy": 0.7},
                       "winning_echelons": ["policy"]},
        "shock_sets": {
            "weights": [{"name": "reweigh reconnaissance",
                         "site": "policy.weights[reconnaissance]", "delta": 0.02}],
        },
        "deviations": [
            {"name": "all-in reconnaissance", "echelon": "strategic",
             "allocation": {"reconnaissance": 3.0}},
            {"name": "always strike", "echelon": "operational", "operation": "disruption",
             "action": "strike"},
            {"name": "phish anyway", "echelon": "tactical", "operation": "escalation",
             "action_d": "harden", "action_a": "scan", "sequence": ["phish"]},
        ],
        "solver": {"damping": 0.5, "tolerance": 1e-6, "max_iter": 200, "seed": 7},
    }))
