import json

import pytest

from cwtoolkit.errors import ParseError, ScenarioValidationError, UnknownCategory
from cwtoolkit.meta import find_warfare_equilibrium
from cwtoolkit.scenario import (BUILTINS, TEMPLATES, builtin, build_report, emit_report,
                                emit_scenario, instantiate_template, load_scenario,
                                parse_report, parse_scenario)
from cwtoolkit.scenario.schema import OperationTemplate, transition_array


def minimal_doc():
    return json.loads(emit_scenario(builtin("minimal")))


def expect_invalid(doc):
    with pytest.raises(ScenarioValidationError) as err:
        parse_scenario(json.dumps(doc))
    return err.value


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_builtins_round_trip(name):
    scn = builtin(name)
    text = emit_scenario(scn)
    again = parse_scenario(text)
    assert again == scn
    assert emit_scenario(again) == text


def test_parse_error_position():
    with pytest.raises(ParseError) as err:
        parse_scenario('{\n  "metadata": ,\n}')
    assert err.value.line == 2
    assert err.value.column > 1


def test_unknown_tactic_path():
    doc = minimal_doc()
    doc["tactical"]["feasibility"]["op"]["rules"][0]["allowed_d"] = ["ghost"]
    err = expect_invalid(doc)
    assert err.path == "tactical.feasibility.op.rules[0].allowed_d"
    assert err.rule == "unknown tactic 'ghost'"


def test_transition_rows_must_sum_to_one():
    doc = minimal_doc()
    doc["operational"]["op"]["mechanisms"]["none"]["transition"] = [
        {"state": "s0", "next": {"s0": 0.9}}]
    err = expect_invalid(doc)
    assert err.path == "operational.op.transition"
    assert "sums to 0.9" in err.rule


def test_schema_rules():
    doc = minimal_doc()
    doc["thresholds"]["winning_echelons"] = ["strategic"]
    assert expect_invalid(doc).path == "thresholds.winning_echelons"

    doc = minimal_doc()
    doc["schema_version"] = 2
    assert expect_invalid(doc).path == "schema_version"

    doc = minimal_doc()
    doc["colour"] = "red"
    assert expect_invalid(doc).path == "colour"

    doc = minimal_doc()
    doc["strategic"]["base_weights"] = {"op": 0.5}
    assert expect_invalid(doc).path == "strategic.base_weights"

    doc = minimal_doc()
    doc["coalition"]["defender"] = "red"
    assert expect_invalid(doc).path == "coalition.defender"

    doc = minimal_doc()
    doc["shock_sets"] = {"bad": [{"site": "policy.nothing", "delta": 1.0}]}
    assert expect_invalid(doc).path == "shock_sets.bad[0].site"


def test_load_scenario(tmp_path):
    assert load_scenario("@minimal") == builtin("minimal")

    path = tmp_path / "campaign.json"
    path.write_text(emit_scenario(builtin("decoy-sacrifice")))
    assert load_scenario(str(path)).metadata.name == "decoy-sacrifice"

    with pytest.raises(UnknownCategory):
        load_scenario("@nope")


def test_specific_rows_override_wildcards():
    tmpl = OperationTemplate.model_validate({
        "horizon": 1, "states": ["a", "b"], "initial_state": "a",
        "actions_d": [{"name": "x"}, {"name": "y"}], "actions_a": ["u"],
        "deception": "m",
        "mechanisms": {"m": {"transition": [
            {"state": "a", "action_d": "x", "next": {"a": 1.0}},
            {"state": "a", "next": {"b": 1.0}}]}}})
    T = transition_array(tmpl, ["x", "y"], ["u"])
    assert T[0, 0, 0].tolist() == [1.0, 0.0]
    assert T[0, 1, 0].tolist() == [0.0, 1.0]
    # undeclared rows stay in place
    assert T[1, 0, 0].tolist() == [0.0, 1.0]


@pytest.mark.parametrize("category", sorted(TEMPLATES))
def test_templates_instantiate(category):
    scn = instantiate_template(category)
    assert parse_scenario(emit_scenario(scn)) == scn


def test_template_categories():
    sym = instantiate_template("symmetric")
    for cat in sym.tactical.catalogs.values():
        for entry in cat.pair_payoffs:
            assert entry.payoff[1] == -entry.payoff[0]

    esc = instantiate_template("escalatory")
    tmpl = esc.operational["escalation"]
    assert len(tmpl.states) >= 3
    pay = [tmpl.state_payoff[s] for s in tmpl.states]
    assert pay == sorted(pay)

    asym = instantiate_template("asymmetric")
    assert asym.coalition.budget_rule.base < asym.strategic.attacker_budget

    with pytest.raises(UnknownCategory):
        instantiate_template("hybrid")


def test_report_round_trip():
    scn = builtin("degenerate")
    config, trace = find_warfare_equilibrium(scn)
    report = build_report(scn, config, trace, 0.5, 1e-6, 200, timings={"solve": 0.01})
    text = emit_report(report)
    assert "timings" not in text
    again = parse_report(text)
    assert emit_report(again) == text
    assert again.trace.converged

    human = emit_report(report, "human_text")
    assert "Converged: true" in human
    with pytest.raises(ValueError):
        emit_report(report, "yaml")
    with pytest.raises(ParseError):
        parse_report("{")


def test_redcyber_is_labelled_illustrative():
    for name in ("redcyber", "redcyber-small"):
        assert "Illustrative" in builtin(name).metadata.description
