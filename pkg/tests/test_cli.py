import json

from cwtoolkit import cwgame
from cwtoolkit.cwgame import main
from cwtoolkit.scenario import builtin, emit_scenario, parse_report
from cwtoolkit.utils import read_h5


def test_validate(tmp_path, capsys):
    assert main(["validate", "@minimal"]) == 0
    assert "valid: minimal" in capsys.readouterr().out

    bad = tmp_path / "bad.json"
    bad.write_text('{"metadata": ')
    assert main(["validate", str(bad)]) == 1
    assert main(["validate", "@nope"]) == 1


def test_usage_errors(capsys):
    assert main(["fly"]) == 1
    assert main([]) == 1
    assert main(["perturb", "@minimal"]) == 1


def test_template_then_validate(tmp_path, capsys):
    out = tmp_path / "ladder.json"
    assert main(["template", "escalatory", "-o", str(out)]) == 0
    assert main(["validate", str(out)]) == 0
    assert main(["template", "nope"]) == 1


def test_solve_writes_report(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("CWTOOLKIT_OUTDIR", str(tmp_path))
    assert main(["solve", "@degenerate", "-o", "r.json"]) == 0
    assert "Converged: true" in capsys.readouterr().out
    report = parse_report((tmp_path / "r.json").read_text())
    assert report.trace.converged
    assert report.run.scenario == "degenerate"


def test_solve_reports_non_convergence(capsys):
    assert main(["solve", "@redcyber-small", "-i", "2", "-f", "machine"]) == 2
    assert json.loads(capsys.readouterr().out)["trace"]["converged"] is False


def test_machine_output_is_pure_json(capsys):
    assert main(["solve", "@degenerate", "-f", "machine"]) == 0
    captured = capsys.readouterr()
    doc = json.loads(captured.out)
    assert doc["trace"]["converged"] is True
    assert "Execution time" in captured.err
    assert "solving degenerate" in captured.err


def test_solve_plot(tmp_path, capsys):
    png = tmp_path / "trace.png"
    assert main(["solve", "@degenerate", "-p", str(png)]) == 0
    assert png.exists()


def test_simulate(tmp_path, capsys):
    out = tmp_path / "t.h5"
    assert main(["simulate", "@degenerate", "-m", "5", "-o", str(out)]) == 0
    cum = read_h5(str(out), ["op/cumulative"])
    assert cum.shape == (5,)


def test_perturb(capsys):
    assert main(["perturb", "@strategic-test", "--site", "policy.budget", "--delta", "1"]) == 0
    assert "re-converged: true" in capsys.readouterr().out
    assert main(["perturb", "@strategic-test", "--site", "policy.moon", "--delta", "1"]) == 1


def test_assess(capsys):
    assert main(["assess", "@decoy-sacrifice"]) == 0
    out = capsys.readouterr().out
    assert "lose-battle-win-war: true" in out
    assert "winning: true" in out
    assert main(["assess", "@decoy-sacrifice", "--shock-set", "missing"]) == 1


def test_paradoxes(capsys):
    assert main(["paradox", "parrondo", "--schedule", "ABB"]) == 0
    out = capsys.readouterr().out
    assert "mixed" in out and "ABB" in out
    assert main(["paradox", "braess"]) == 0
    assert "+15" in capsys.readouterr().out
    assert main(["paradox", "parrondo", "--schedule", "AC"]) == 2


def test_out_of_range_parameters_are_invalid_input(capsys):
    assert main(["paradox", "parrondo", "--gamma", "2"]) == 1
    assert "error:" in capsys.readouterr().err
    assert main(["paradox", "parrondo", "--epsilon", "0.6"]) == 1


def test_internal_errors_exit_3(monkeypatch, capsys):
    def boom(args):
        raise RuntimeError("boom")

    monkeypatch.setitem(cwgame.COMMANDS, "validate", boom)
    assert main(["validate", "@minimal"]) == 3
    assert "internal error: boom" in capsys.readouterr().err


def test_sweep_failure_names_the_echelon(tmp_path, capsys):
    scn = builtin("minimal").model_copy(deep=True)
    scn.strategic.attacker_budget = 100.0
    path = tmp_path / "huge.json"
    path.write_text(emit_scenario(scn))
    assert main(["solve", str(path)]) == 2
    assert "strategic echelon failed" in capsys.readouterr().err
