import json

import numpy as np
import pytest

from cwtoolkit.errors import NoFeasibleAction, NotConverged, SweepError
from cwtoolkit.meta import (PAIRS, apply_perturbation, assess, check_hylomorphism, coords,
                            dominance, find_warfare_equilibrium, hylomorphism_report,
                            initial_configuration, parse_site, perturb_and_propagate, refresh,
                            stability, winning)
from cwtoolkit.meta.mappings import cata_S_to_P, grid_budget, operation_spec, unfold_tactical
from cwtoolkit.scenario import builtin, emit_scenario, instantiate_template, parse_scenario
from cwtoolkit.scenario.schema import transition_array
from cwtoolkit.strategic import StrategicGame, solve_strategic
from cwtoolkit.technical import ECHELONS, TechLevel


def test_grid_budget():
    assert grid_budget(3.4, 1.0) == 3.0
    assert grid_budget(3.6, 0.5) == 3.5
    assert grid_budget(2.9999999999, 1.0) == 3.0


def test_operation_spec_filters_by_cost():
    scn = instantiate_template("asymmetric")
    spec = operation_spec(scn, "perimeter", 0.2, TechLevel())
    assert spec.actions_d == ("patch",)
    spec = operation_spec(scn, "perimeter", 1.0, TechLevel(cost_factor=10.0))
    assert spec.actions_d == ("patch",)
    assert operation_spec(scn, "perimeter", 0.5, TechLevel()).actions_d == ("patch", "monitor")
    with pytest.raises(NoFeasibleAction):
        operation_spec(scn, "perimeter", 0.05, TechLevel())


def test_degenerate_converges_at_once():
    config, trace = find_warfare_equilibrium(builtin("degenerate"))
    assert trace.converged and config.converged
    assert trace.iterations == 1
    assert trace.final_residual == 0.0
    assert config.feedback["op"][0] == pytest.approx(0.5)
    assert config.strategic.value_d == pytest.approx(0.5)

    report = hylomorphism_report(config, builtin("degenerate"))
    assert set(report.residuals) == set(PAIRS)
    assert report.within(1e-12)
    assert report.slack == 0.0


def test_redcyber_small_converges(small, small_eq):
    config, trace = small_eq
    assert trace.converged
    assert trace.iterations <= 200
    assert trace.final_residual <= 1e-6

    report = hylomorphism_report(config, small)
    for pair in PAIRS:
        assert report.residuals[pair] <= 1e-6

    _, residual = refresh(config, small)
    assert residual <= 1e-6


def test_redcyber_small_fixed_point(small_eq):
    config, _ = small_eq
    values = {op: sol.cumulative_value_d for op, sol in config.operational.items()}
    assert values == pytest.approx({"reconnaissance": 2.2, "disruption": 0.96,
                                    "escalation": 0.3})
    assert config.feedback["reconnaissance"] == pytest.approx((0.5, 0.5))
    assert config.feedback["disruption"] == pytest.approx((0.37, 0.5))
    assert config.feedback["escalation"] == pytest.approx((1.3 / 3, 0.5))
    assert config.strategic.mean_allocation_d == pytest.approx([1.0, 1.0, 1.0])

    f = np.array([0.5, 0.37, 1.3 / 3])
    assert config.policy.weights == pytest.approx(f / f.sum(), abs=1e-5)
    assert config.strategic.value_d == pytest.approx(f @ f / f.sum(), abs=1e-5)
    assert 3.0 <= config.policy.budget < 4.0

    assert config.tactical[("escalation", "harden", "scan")].U_dT == pytest.approx(0.2)
    assert config.tactical[("escalation", "observe", "scan")].U_dT == pytest.approx(-0.3)


def test_coordinates(small_eq):
    config, _ = small_eq
    c = coords(config)
    assert "policy.budget" in c
    assert "feedback.f[disruption]" in c
    assert "strategic.value_d" in c
    assert "operational[reconnaissance].pi_d[1][quiet][harden]" in c
    assert "tactical[disruption][observe][strike].U_d" in c
    assert all("payoff.d[%s]" % e in c for e in ECHELONS)


def test_decoy_sacrifice(decoy, decoy_eq):
    config, trace = decoy_eq
    assert trace.converged and trace.iterations == 1
    assert config.feedback["lure"] == pytest.approx((0.875, 2 / 3))
    assert config.payoffs.d["strategic"] == pytest.approx(0.875)
    assert config.payoffs.d["policy"] == pytest.approx(8.75)
    assert config.payoffs.a["policy"] == pytest.approx(1.25)
    assert config.payoffs.d["tactical"] == -1.0

    verdicts = assess(config, decoy.thresholds, decoy)
    assert verdicts.winning
    assert verdicts.lose_battle_win_war
    assert verdicts.dominant
    assert verdicts.stable
    assert verdicts.evidence["winning"] == {"policy": True}


def test_winning_thresholds(decoy, decoy_eq):
    config, _ = decoy_eq
    thresholds = decoy.thresholds.model_copy(update={"theta_d": {"policy": 9.0}})
    won, checks = winning(config.payoffs, thresholds)
    assert not won and checks == {"policy": False}


def test_redcyber_small_assessment(small, small_eq):
    config, _ = small_eq
    verdicts = assess(config, small.thresholds, small, small.shock_sets["weights"])
    assert verdicts.stable
    assert verdicts.winning
    assert verdicts.lose_battle_win_war
    # the attacker keeps the larger share of the allocation game
    assert not verdicts.dominant
    dom = verdicts.evidence["dominance"]
    assert dom["checks"]["strategic"] is False
    assert set(dom["deviations"]) == {"all-in reconnaissance", "always strike", "phish anyway"}
    assert dom["deviations"]["phish anyway"] == pytest.approx(0.1)
    assert dom["deviations"]["all-in reconnaissance"] < config.payoffs.a["strategic"]


def test_dominance_scope(strategic_test, strategic_eq):
    config, _ = strategic_eq
    ok, evidence = dominance(config, strategic_test)
    assert set(evidence["checks"]) == {"strategic"}
    assert evidence["attacker_best"]["strategic"] >= config.payoffs.a["strategic"]


def test_zero_delta_perturbation(strategic_test, strategic_eq):
    config, _ = strategic_eq
    rep = perturb_and_propagate(config, strategic_test, "policy.budget", 0.0)
    assert rep.converged
    assert all(v == 0.0 for v in rep.deltas_d.values())
    assert all(v == 0.0 for v in rep.deltas_a.values())


def test_budget_perturbation_raises_strategic_value(strategic_test, strategic_eq):
    config, _ = strategic_eq
    rep = perturb_and_propagate(config, strategic_test, "policy.budget", 1.0)
    assert rep.converged
    assert rep.config.policy.budget == pytest.approx(3.0)

    def value(budget_d):
        return solve_strategic(StrategicGame(("alpha", "beta"), [0.6, 0.4], budget_d, 2.0,
                                             config.strategic.game.contests)).value_d

    assert rep.deltas_d["strategic"] >= 0.0
    assert rep.deltas_d["strategic"] == pytest.approx(value(3.0) - value(2.0), abs=1e-5)


def test_budget_shock_is_not_stable(strategic_test, strategic_eq):
    config, _ = strategic_eq
    stable, results = stability(config, strategic_test, strategic_test.shock_sets["budget"])
    assert not stable
    assert results[0]["converged"]
    assert results[0]["distance"] >= 1.0


def test_transition_perturbation(small, small_eq):
    config, _ = small_eq
    site = "operational.transition[disruption][up][harden][scan][degraded]"
    _, scn = apply_perturbation(config, small, site, 0.2)
    tmpl = scn.operational["disruption"]
    T = transition_array(tmpl, ["harden", "observe"], ["scan", "strike"])
    assert T[0, 0, 0] == pytest.approx([0.7 / 1.2, 0.5 / 1.2])
    assert T[0, 1, 0] == pytest.approx([0.7, 0.3])
    assert T[0, 0, 1] == pytest.approx([0.7, 0.3])
    # the original scenario is untouched
    T0 = transition_array(small.operational["disruption"], ["harden"], ["scan"])
    assert T0[0, 0, 0] == pytest.approx([0.7, 0.3])


def test_tactical_and_tech_perturbations(small, small_eq):
    config, _ = small_eq
    _, scn = apply_perturbation(config, small, "tactical.pair_payoff[intrusion][isolate][phish]",
                                0.1)
    pairs = {(e.tactic_d, e.tactic_a): e.payoff
             for e in scn.tactical.catalogs["intrusion"].pair_payoffs}
    assert pairs[("isolate", "phish")] == pytest.approx((0.3, 0.1))

    _, scn = apply_perturbation(config, small, "tech.cost_factor", 0.5)
    assert scn.tech.cost_factor == 1.5
    assert small.tech.cost_factor == 1.0

    with pytest.raises(ValueError):
        apply_perturbation(config, small, "tech.cost_factor", -2.0)


def test_weight_perturbation_recovers(small, small_eq):
    config, _ = small_eq
    start, _ = apply_perturbation(config, small, "policy.weights[reconnaissance]", 0.02)
    assert start.policy.weights.sum() == pytest.approx(1.0)
    assert start.policy.weight("reconnaissance") > config.policy.weight("reconnaissance")


@pytest.mark.parametrize("site", ["policy.nothing", "tech.warp_speed", "policy.weights[moon]",
                                  "policy.budget[x]", "garbage",
                                  "tactical.pair_payoff[intrusion][isolate]"])
def test_bad_sites(small, site):
    with pytest.raises(ValueError):
        parse_site(site, small)


def test_sweep_errors_name_the_echelon():
    scn = builtin("minimal").model_copy(deep=True)
    scn.strategic.attacker_budget = 100.0
    with pytest.raises(SweepError) as err:
        find_warfare_equilibrium(scn)
    assert err.value.echelon == "strategic"


def test_iteration_cap_and_unconverged_assessment(small):
    config, trace = find_warfare_equilibrium(small, max_iter=2)
    assert not trace.converged and not config.converged
    assert trace.iterations == 2
    with pytest.raises(NotConverged):
        assess(config, small.thresholds, small)
    with pytest.raises(NotConverged):
        perturb_and_propagate(config, small, "policy.budget", 1.0)


def test_solver_argument_checks(small):
    with pytest.raises(ValueError):
        find_warfare_equilibrium(small, damping=0.0)
    with pytest.raises(ValueError):
        find_warfare_equilibrium(small, tolerance=-1.0)


def test_unknown_pair(small, small_eq):
    with pytest.raises(ValueError):
        check_hylomorphism(small_eq[0], small, "P<->X")


def test_weights_fixed_without_rate(strategic_test, strategic_eq):
    config, _ = strategic_eq
    _, weights = cata_S_to_P(config.strategic, strategic_test, config.policy, config.feedback)
    assert weights == pytest.approx([0.6, 0.4])


def test_tactical_cache(small):
    config = initial_configuration(small)
    cache = {}
    spec = config.games["escalation"]
    first, term = unfold_tactical(small, "escalation", spec, "defender_optimal", cache)
    again, _ = unfold_tactical(small, "escalation", spec, "defender_optimal", cache)
    assert all(first[k] is again[k] for k in first)
    assert term.shape == (2, 2, 2)


def test_operational_deviation_is_weighted_like_the_payoff():
    doc = json.loads(emit_scenario(builtin("strategic-test")))
    doc["coalition"]["budget_rule"]["base"] = 10.0
    doc["strategic"]["attacker_budget"] = 1.0
    doc["strategic"]["base_weights"] = {"alpha": 0.9, "beta": 0.1}
    doc["operational"]["alpha"]["state_payoff"] = {"s0": 1.0}
    doc["operational"]["beta"]["state_payoff"] = {"s0": -5.0}
    doc["deviations"] = [{"name": "push beta", "echelon": "operational",
                          "operation": "beta", "action": "push"}]
    scn = parse_scenario(json.dumps(doc))
    config, trace = find_warfare_equilibrium(scn)
    assert trace.converged
    assert set(config.operational) == {"alpha", "beta"}

    ok, evidence = dominance(config, scn)
    u = evidence["deviations"]["push beta"]
    # the low-weight operation alone beats the defender, the weighted campaign does not
    assert config.operational["beta"].cumulative_value_a > config.payoffs.d["operational"]
    assert u == pytest.approx(config.payoffs.a["operational"])
    assert u == pytest.approx(0.9 * -1.0 + 0.1 * 5.0)
    assert evidence["checks"]["operational"] is True


def test_damping_does_not_move_the_fixed_point(small, small_eq):
    config, _ = small_eq
    slow, trace = find_warfare_equilibrium(small, damping=0.25, tolerance=1e-6, max_iter=400)
    assert trace.converged
    a, b = coords(config), coords(slow)
    assert set(a) == set(b)
    assert max(abs(a[k] - b[k]) for k in a) <= 2e-6


@pytest.mark.parametrize("name", ["decoy-sacrifice", "redcyber-small"])
def test_looser_thresholds_keep_a_win(name, rng, decoy_eq, small_eq):
    scn = builtin(name)
    config, _ = decoy_eq if name == "decoy-sacrifice" else small_eq
    th = scn.thresholds
    won, _ = winning(config.payoffs, th)
    for _ in range(20):
        looser = th.model_copy(update={
            "theta_d": {e: v - rng.uniform(0.0, 2.0) for e, v in th.theta_d.items()},
            "theta_a": {e: v + rng.uniform(0.0, 2.0) for e, v in th.theta_a.items()}})
        stricter = th.model_copy(update={
            "theta_d": {e: v + rng.uniform(0.0, 2.0) for e, v in th.theta_d.items()},
            "theta_a": {e: v - rng.uniform(0.0, 2.0) for e, v in th.theta_a.items()}})
        if won:
            assert winning(config.payoffs, looser)[0]
        else:
            assert not winning(config.payoffs, stricter)[0]


def test_shock_on_an_unplayed_tactic_changes_nothing():
    doc = json.loads(emit_scenario(builtin("minimal")))
    catalog = doc["tactical"]["catalogs"]["basic"]
    catalog["tactics_d"] = ["guard", "doze"]
    catalog["pair_payoffs"].append({"tactic_d": "doze", "tactic_a": "probe",
                                    "payoff": [-2.0, 0.0]})
    doc["tactical"]["feasibility"]["op"]["rules"][0]["allowed_d"] = ["guard", "doze"]
    scn = parse_scenario(json.dumps(doc))
    config, trace = find_warfare_equilibrium(scn)
    assert trace.converged
    out = config.tactical[("op", "hold", "push")]
    assert [s.steps for s, p in zip(out.sequences_d, out.strategy_d.weights) if p > 0] \
        == [("guard",)]

    rep = perturb_and_propagate(config, scn, "tactical.pair_payoff[basic][doze][probe]", 0.5)
    assert rep.converged
    for e in ECHELONS:
        assert rep.deltas_d[e] == pytest.approx(0.0, abs=1e-12)
        assert rep.deltas_a[e] == pytest.approx(0.0, abs=1e-12)
