# ruff: noqa: PLC0415

from __future__ import annotations

import pytest
from dbetto import utils

UNNORMALIZED = """\
[contents]
a1 b1

[contexts]
a1-b1: a1 b1

[supports]
a1 @ a1-b1: +1 -1
b1 @ a1-b1: +1 -1

[bunch a1-b1]
+1 +1 : 1/3
"""


def _scenario_file(tmp_path, scenario):
    from couplecheck.scenarios import build
    from couplecheck.systemfile import write_system_file

    path = tmp_path / f"{scenario}.sys"
    write_system_file(build(scenario), path)
    return str(path)


def test_no_command_errors():
    from couplecheck import cli

    with pytest.raises(SystemExit):
        cli.couplecheck_cli([])


def test_validate(tmp_path, capsys):
    from couplecheck import cli

    path = _scenario_file(tmp_path, "pr-box")
    assert cli.couplecheck_cli(["validate", path]) == cli.EXIT_OK
    assert f"{path}: valid" in capsys.readouterr().out


def test_validate_reports_violations(tmp_path, capsys):
    from couplecheck import cli

    bad = tmp_path / "bad.sys"
    bad.write_text(UNNORMALIZED)

    assert cli.couplecheck_cli(["validate", str(bad)]) == cli.EXIT_INVALID
    err = capsys.readouterr().err
    assert "MassNotNormalized" in err
    assert "[bunch a1-b1] line 11" in err


def test_validate_reports_parse_errors(tmp_path, capsys):
    from couplecheck import cli

    bad = tmp_path / "bad.sys"
    bad.write_text(UNNORMALIZED.replace("1/3", "0.33"))

    assert cli.couplecheck_cli(["validate", str(bad)]) == cli.EXIT_INVALID
    assert "ParseError: line 12" in capsys.readouterr().err


def test_analyze_pr_box(tmp_path, capsys):
    from couplecheck import cli

    path = _scenario_file(tmp_path, "pr-box")
    assert cli.couplecheck_cli(["analyze", "--format", "machine", path]) == cli.EXIT_CONTEXTUAL

    lines = capsys.readouterr().out.splitlines()
    assert "chsh_value=4/1" in lines
    assert "extended_bound=2/1" in lines
    assert "noncontextual=false" in lines
    assert "oracle_agreement=true" in lines


def test_analyze_noncontextual(tmp_path, capsys):
    from couplecheck import cli

    path = _scenario_file(tmp_path, "epr-uniform")
    assert cli.couplecheck_cli(["analyze", path]) == cli.EXIT_OK
    assert "verdict: noncontextual" in capsys.readouterr().out


def test_analyze_without_shared_contents(tmp_path, capsys):
    from couplecheck import cli

    path = _scenario_file(tmp_path, "survey-four-contexts")
    assert cli.couplecheck_cli(["analyze", path]) == cli.EXIT_STRUCTURE
    assert "system has no shared contents across contexts" in capsys.readouterr().err


def test_analyze_general_system(tmp_path, capsys):
    from couplecheck import cli

    path = _scenario_file(tmp_path, "question-order-shared")
    assert cli.couplecheck_cli(["analyze", "--format", "machine", path]) == cli.EXIT_OK

    out = capsys.readouterr().out.splitlines()
    assert "structure=general" in out
    assert "chsh_value=n/a" in out


def test_analyze_many_files(tmp_path, capsys):
    """The exit code is the worst over all files, and each result names its file."""
    from couplecheck import cli

    files = [_scenario_file(tmp_path, s) for s in ("epr-uniform", "pr-box", "survey-four-contexts")]
    report = tmp_path / "report.yaml"

    code = cli.couplecheck_cli(["analyze", "--format", "machine", "--write-report", str(report), *files])
    assert code == cli.EXIT_CONTEXTUAL
    out = capsys.readouterr().out.splitlines()
    assert f"file={files[0]}" in out
    assert f"file={files[1]}" in out

    document = utils.load_dict(str(report))
    assert document["metadata"]["n_systems"] == 2
    assert [s["source"] for s in document["systems"]] == files[:2]


def test_analyze_exit_code_prefers_invalid_input_over_nothing(tmp_path):
    from couplecheck import cli

    bad = tmp_path / "bad.sys"
    bad.write_text(UNNORMALIZED)
    assert cli.couplecheck_cli(["analyze", str(bad), _scenario_file(tmp_path, "epr-uniform")]) == cli.EXIT_INVALID


def test_couple_marked_dice(tmp_path, capsys):
    from couplecheck import cli

    path = _scenario_file(tmp_path, "two-dice-marked")
    assert cli.couplecheck_cli(["couple", "--kind", "independent", path]) == cli.EXIT_OK

    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 36
    assert all(line.endswith(" : 1/36") for line in lines)
    assert lines[0] == "1 1 : 1/36"


def test_couple_identity_needs_equal_marginals(tmp_path, capsys):
    from couplecheck import cli

    path = _scenario_file(tmp_path, "luce-two-cities")
    assert cli.couplecheck_cli(["couple", "--kind", "identity", path]) == cli.EXIT_STRUCTURE
    assert "DistributionsDiffer" in capsys.readouterr().err


def test_couple_pr_box_is_infeasible(tmp_path, capsys):
    from couplecheck import cli

    path = _scenario_file(tmp_path, "pr-box")
    assert cli.couplecheck_cli(["couple", "--kind", "maximal", path]) == cli.EXIT_CONTEXTUAL
    assert capsys.readouterr().out.strip() == "INFEASIBLE"


def test_couple_with_targets(tmp_path, capsys):
    from couplecheck import cli

    path = _scenario_file(tmp_path, "luce-two-cities")
    targets = tmp_path / "targets.yaml"

    utils.write_dict({"outcome": "4/5"}, str(targets))
    assert cli.couplecheck_cli(["couple", "--kind", "targets", "--targets", str(targets), path]) == cli.EXIT_OK
    # the unique coupling with Pr[equal] = 4/5.
    assert capsys.readouterr().out.splitlines() == ["1 1 : 1/2", "1 0 : 1/5", "0 0 : 3/10"]

    utils.write_dict({"outcome": "9/10"}, str(targets))
    assert cli.couplecheck_cli(["couple", "--kind", "targets", "--targets", str(targets), path]) == cli.EXIT_CONTEXTUAL

    utils.write_dict({"outcome": "0.9"}, str(targets))
    assert cli.couplecheck_cli(["couple", "--kind", "targets", "--targets", str(targets), path]) == cli.EXIT_INVALID

    utils.write_dict({"nothing": "1"}, str(targets))
    assert cli.couplecheck_cli(["couple", "--kind", "targets", "--targets", str(targets), path]) == cli.EXIT_STRUCTURE

    assert cli.couplecheck_cli(["couple", "--kind", "targets", path]) == cli.EXIT_INVALID


@pytest.mark.parametrize(
    ("scenario", "verdict"),
    [("fair-die-AB", "A and B: not independent"), ("rigged-die-AB", "A and B: independent")],
)
def test_demo_dice(capsys, scenario, verdict):
    from couplecheck import cli

    assert cli.couplecheck_cli(["demo", scenario]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith(f"# {scenario}: ")
    assert "[bunch roll]" in out
    assert verdict in out.splitlines()


def test_demo_writes_the_system(tmp_path, capsys):
    from couplecheck import cli
    from couplecheck.scenarios import build
    from couplecheck.systemfile import read_system_file

    out = tmp_path / "pr-box.sys"
    assert cli.couplecheck_cli(["demo", "pr-box", "-o", str(out)]) == cli.EXIT_CONTEXTUAL
    assert read_system_file(out).system == build("pr-box")
    assert "[bunch" not in capsys.readouterr().out


def test_demo_unknown_scenario(capsys):
    from couplecheck import cli

    assert cli.couplecheck_cli(["demo", "schrodingers-cat"]) == cli.EXIT_STRUCTURE
    assert "UnknownScenario" in capsys.readouterr().err


def test_demo_takes_parameters_from_the_config(tmp_path, capsys):
    from couplecheck import cli

    config_file = tmp_path / "config.yaml"
    utils.write_dict({"scenario_parameters": {"tsirelson-rational": {"magnitude": "1/2"}}}, str(config_file))

    code = cli.couplecheck_cli(["--config", str(config_file), "demo", "tsirelson-rational", "--format", "machine"])
    assert code == cli.EXIT_OK
    assert "chsh_value=2/1" in capsys.readouterr().out.splitlines()


def test_write_config_only(tmp_path):
    from couplecheck import cli, config

    out = tmp_path / "resolved.yaml"
    assert cli.couplecheck_cli(["--write-config", str(out)]) == cli.EXIT_OK

    assert config.load_config(out) == config.resolve_config({})


def test_cli_args_override_the_config_file(tmp_path):
    from couplecheck import cli

    config_file = tmp_path / "config.yaml"
    utils.write_dict({"format": "machine", "sweep": {"seed": 3, "grid": 16}}, str(config_file))

    args = cli._parse_cli_args(["--config", str(config_file), "sweep", "--seed", "7"])
    config = cli.load_runtime_config(args)

    assert config["sweep"]["seed"] == 7
    assert config["sweep"]["grid"] == 16
    assert config["format"] == "machine"


def test_sweep(capsys):
    from couplecheck import cli

    code = cli.couplecheck_cli(["sweep", "--n-systems", "30", "--seed", "1", "--grid", "16"])
    assert code == cli.EXIT_OK

    out = capsys.readouterr().out.splitlines()
    assert "n_systems=50" in out
    assert "n_disagreements=0" in out


PRESET_EXIT_CODES = [
    ("fair-die-AB", 2),
    ("rigged-die-AB", 2),
    ("two-dice-marked", 2),
    ("luce-two-cities", 0),
    ("survey-four-contexts", 2),
    ("survey-paired-contexts", 0),
    ("question-order-shared", 0),
    ("question-order-split", 2),
    ("epr-uniform", 0),
    ("pr-box", 3),
    ("tsirelson-rational", 3),
]


@pytest.mark.parametrize(("scenario", "code"), PRESET_EXIT_CODES)
def test_analyze_exit_codes_of_all_presets(tmp_path, capsys, scenario, code):
    from couplecheck import cli

    path = _scenario_file(tmp_path, scenario)
    assert cli.couplecheck_cli(["analyze", "--format", "machine", path]) == code

    captured = capsys.readouterr()
    if code == cli.EXIT_STRUCTURE:
        assert "StructuralMismatch" in captured.err
    else:
        verdict = "true" if code == cli.EXIT_OK else "false"
        assert f"noncontextual={verdict}" in captured.out.splitlines()


def test_every_preset_has_an_exit_code():
    from couplecheck.scenarios import ScenarioId

    assert sorted(s for s, _ in PRESET_EXIT_CODES) == sorted(s.value for s in ScenarioId)


def test_couple_identity_ignores_zero_mass_values(tmp_path, capsys):
    from couplecheck import cli

    text = """\
[contents]
q

[contexts]
c1: q
c2: q

[supports]
q @ c1: 0 1
q @ c2: 0 1 2

[bunch c1]
0 : 1/4
1 : 3/4

[bunch c2]
0 : 1/4
1 : 3/4
"""
    path = tmp_path / "padded.sys"
    path.write_text(text)

    assert cli.couplecheck_cli(["couple", "--kind", "identity", str(path)]) == cli.EXIT_OK
    assert capsys.readouterr().out.splitlines() == ["0 0 : 1/4", "1 1 : 3/4"]


@pytest.mark.parametrize(
    ("option", "message"),
    [
        (["--selective-fraction", "0.5"], "ParseError"),
        (["--grid", "0"], "invalid configuration"),
    ],
)
def test_sweep_rejects_bad_settings(capsys, option, message):
    from couplecheck import cli

    assert cli.couplecheck_cli(["sweep", *option]) == cli.EXIT_INVALID
    assert message in capsys.readouterr().err
