# ruff: noqa: PLC0415

from __future__ import annotations

from fractions import Fraction

import pytest

PR_BOX_A1_B1 = """\
[contents]
a1 b1

[contexts]
a1-b1: a1 b1

[supports]
a1 @ a1-b1: +1 -1
b1 @ a1-b1: +1 -1

[bunch a1-b1]
+1 +1 : 1/2
-1 -1 : 1/2
"""

SCENARIOS = [
    "fair-die-AB",
    "rigged-die-AB",
    "two-dice-marked",
    "luce-two-cities",
    "survey-four-contexts",
    "survey-paired-contexts",
    "question-order-shared",
    "question-order-split",
    "epr-uniform",
    "pr-box",
    "tsirelson-rational",
]


def test_parse():
    from couplecheck.system import Observable, validate_system
    from couplecheck.systemfile import parse_system_file

    system = validate_system(parse_system_file(PR_BOX_A1_B1).system)

    assert system.contents == ("a1", "b1")
    assert system.context("a1-b1").measured == ("a1", "b1")
    assert system.support(Observable("b1", "a1-b1")) == ("+1", "-1")
    assert system.bunch("a1-b1").joint == {("+1", "+1"): Fraction(1, 2), ("-1", "-1"): Fraction(1, 2)}


def test_comments_and_blank_lines():
    from couplecheck.systemfile import parse_system_file

    text = "# a comment\n\n" + PR_BOX_A1_B1.replace("[contents]", "[contents]  # trailing comment")
    assert parse_system_file(text).system == parse_system_file(PR_BOX_A1_B1).system


def test_print_is_canonical():
    from couplecheck.systemfile import parse_system_file, print_system_file

    assert print_system_file(parse_system_file(PR_BOX_A1_B1).system) == PR_BOX_A1_B1


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_presets_survive_printing(scenario):
    from couplecheck.scenarios import build
    from couplecheck.system import validate_system
    from couplecheck.systemfile import parse_system_file, print_system_file

    system = build(scenario)
    text = print_system_file(system)
    parsed = validate_system(parse_system_file(text).system)

    assert parsed == system
    assert print_system_file(parsed) == text


def test_zero_masses_are_omitted():
    from couplecheck.scenarios import build
    from couplecheck.systemfile import print_system_file

    text = print_system_file(build("pr-box"))
    assert ": 0/1" not in text
    # each bunch of the PR box has two atoms.
    assert text.count(": 1/2") == 8


def test_write_and_read(tmp_path):
    from couplecheck.scenarios import build
    from couplecheck.systemfile import read_system_file, write_system_file

    system = build("luce-two-cities")
    path = tmp_path / "luce.sys"
    write_system_file(system, path)

    assert read_system_file(path).system == system


@pytest.mark.parametrize(
    ("text", "line", "column", "message"),
    [
        ("a1 b1\n", 1, 1, "outside of any section"),
        ("[content]\na1\n", 1, 1, "unknown section header"),
        ("[contents]\na1\n[contexts]\nc a1\n", 4, 1, "expected 'context: content"),
        ("[supports]\na1 c: +1 -1\n", 2, 1, "expected 'content @ context"),
        ("[supports]\na1 @ c: +1\na1 @ c: -1\n", 3, 1, "second support declaration"),
        ("[bunch c]\n+1 : 1\n[bunch c]\n", 3, 1, "second bunch section"),
        ("[bunch c]\n+1 : 1/2\n+1 : 1/2\n", 3, 1, "listed twice"),
        ("[bunch c]\n+1 1/2\n", 2, 1, "expected 'value value"),
        ("[bunch c]\n+1 +1 : 0.5\n", 2, 9, "fractions only"),
        ("[contents]\na1 a[2]\n", 2, 4, "invalid identifier"),
    ],
)
def test_parse_errors(text, line, column, message):
    from couplecheck import errors
    from couplecheck.systemfile import parse_system_file

    with pytest.raises(errors.ParseError, match=message) as exc_info:
        parse_system_file(text)

    assert exc_info.value.line == line
    assert exc_info.value.column == column


def test_parsing_does_not_validate():
    """An unnormalized bunch is a valid SystemFile; it is rejected by the validation."""
    from couplecheck import errors
    from couplecheck.system import validate_system
    from couplecheck.systemfile import parse_system_file

    parsed = parse_system_file(PR_BOX_A1_B1.replace("-1 -1 : 1/2", "-1 -1 : 1/3"))
    with pytest.raises(errors.InvalidSystemError) as exc_info:
        validate_system(parsed.system)

    (violation,) = exc_info.value.violations
    assert violation.kind == "MassNotNormalized"
    assert parsed.source_map.locate(violation) == ("bunch a1-b1", 11)


def test_source_map_locates_violations():
    from couplecheck import errors
    from couplecheck.system import validate_system
    from couplecheck.systemfile import parse_system_file

    text = PR_BOX_A1_B1.replace("-1 -1 : 1/2", "-1 0 : 1/2")
    parsed = parse_system_file(text)
    with pytest.raises(errors.InvalidSystemError) as exc_info:
        validate_system(parsed.system)

    unknown = [v for v in exc_info.value.violations if v.kind == "UnknownValue"]
    assert unknown
    assert parsed.source_map.locate(unknown[0]) == ("bunch a1-b1", 13)
