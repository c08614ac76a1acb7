"""Preset systems: the dice, survey, question-order and Bell-type examples.

Every builder takes its parameters from the packaged ``configs/scenarios.yaml`` defaults,
deep-merged with the overrides passed to :func:`build`.
"""

from __future__ import annotations

import enum
import logging
import sys
from collections.abc import Callable, Mapping
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

from dbetto import utils

from . import errors
from .config import deep_merge
from .system import Bunch, Context, Distribution, Observable, System, product_bunch, to_rational, validate_system

log = logging.getLogger(__name__)

DIE_FACES = ("1", "2", "3", "4", "5", "6")
INDICATOR = ("1", "0")
YES_NO = ("yes", "no")
PLUS_MINUS = ("+1", "-1")


if sys.version_info >= (3, 11):
    _StrEnum = enum.StrEnum
else:

    class _StrEnum(str, enum.Enum):
        """Python 3.10 fallback matching :class:`enum.StrEnum` string conversion."""

        def __str__(self) -> str:
            return str.__str__(self)

        def __format__(self, format_spec: str) -> str:
            return str.__format__(str(self), format_spec)


class ScenarioId(_StrEnum):
    FAIR_DIE_AB = "fair-die-AB"
    RIGGED_DIE_AB = "rigged-die-AB"
    TWO_DICE_MARKED = "two-dice-marked"
    LUCE_TWO_CITIES = "luce-two-cities"
    SURVEY_FOUR_CONTEXTS = "survey-four-contexts"
    SURVEY_PAIRED_CONTEXTS = "survey-paired-contexts"
    QUESTION_ORDER_SHARED = "question-order-shared"
    QUESTION_ORDER_SPLIT = "question-order-split"
    EPR_UNIFORM = "epr-uniform"
    PR_BOX = "pr-box"
    TSIRELSON_RATIONAL = "tsirelson-rational"


DESCRIPTIONS = {
    ScenarioId.FAIR_DIE_AB: "one fair die; A = outcome even, B = outcome exceeds 3",
    ScenarioId.RIGGED_DIE_AB: "one die with masses (0, 1/4, 1/4, 1/4, 1/4, 0); A and B as for the fair die",
    ScenarioId.TWO_DICE_MARKED: "two dice marked left and right, rolled together",
    ScenarioId.LUCE_TWO_CITIES: "a die rolled in Irvine on Tuesday and in Lafayette on Friday, never paired",
    ScenarioId.SURVEY_FOUR_CONTEXTS: "four survey questions, each asked in a context of its own",
    ScenarioId.SURVEY_PAIRED_CONTEXTS: "husbands' and wives' answers paired by marriage",
    ScenarioId.QUESTION_ORDER_SHARED: "questions a and b asked in either order, the same contents in both",
    ScenarioId.QUESTION_ORDER_SPLIT: "questions asked first and second treated as different contents",
    ScenarioId.EPR_UNIFORM: "Bell-type 2x2 system with uniform marginals",
    ScenarioId.PR_BOX: "the maximally contextual 2x2 system",
    ScenarioId.TSIRELSON_RATIONAL: "rational stand-in for the quantum-mechanical CHSH violation",
}


def scenario_parameters_file() -> Path:
    return Path(str(resources.files("couplecheck") / "configs" / "scenarios.yaml"))


def default_parameters(scenario: ScenarioId | str | None = None) -> dict:
    """The packaged default parameters, of all scenarios or of a single one."""
    defaults = utils.load_dict(str(scenario_parameters_file()))
    if scenario is None:
        return defaults
    return defaults[parse_scenario_id(scenario).value]


def parse_scenario_id(scenario: ScenarioId | str) -> ScenarioId:
    try:
        return ScenarioId(scenario)
    except ValueError:
        msg = f"unknown scenario {scenario!r}, available: {', '.join(s.value for s in ScenarioId)}"
        raise errors.UnknownScenario(msg) from None


def build(scenario: ScenarioId | str, params: Mapping[str, Any] | None = None) -> System:
    """Build and validate a preset system.

    Parameters
    ----------
    scenario
        the scenario id.
    params
        overrides of the default parameters; only the keys that change have to be given.

    Raises
    ------
    ~couplecheck.errors.UnknownScenario
        for an unknown id.
    ~couplecheck.errors.BadParameter
        for unknown parameter names, or values that do not describe a valid system.
    """
    scenario = parse_scenario_id(scenario)
    defaults = default_parameters(scenario)
    unknown = set(params or {}) - set(defaults)
    if unknown:
        msg = f"unknown parameter(s) {', '.join(sorted(unknown))} for scenario {scenario}"
        raise errors.BadParameter(msg)

    merged = deep_merge(defaults, dict(params or {}))
    log.debug("building scenario %s with parameters %s", scenario, merged)
    try:
        system = _BUILDERS[scenario](merged)
        return validate_system(system)
    except (errors.SystemViolation, errors.InvalidSystemError, errors.ParseError) as exc:
        msg = f"parameters {merged} do not give a valid {scenario} system: {exc}"
        raise errors.BadParameter(msg) from exc


def _masses(values: Any, n: int, name: str) -> tuple[Fraction, ...]:
    if not isinstance(values, list | tuple) or len(values) != n:
        msg = f"{name} needs a list of {n} masses, got {values!r}"
        raise errors.BadParameter(msg)
    return tuple(to_rational(v) for v in values)


def _probability(value: Any, name: str) -> Fraction:
    p = to_rational(value)
    if not 0 <= p <= 1:
        msg = f"{name} must be a probability in [0, 1], got {p}"
        raise errors.BadParameter(msg)
    return p


def _single_context(context_id: str, contents: tuple[str, ...], supports: tuple, bunch: Bunch) -> System:
    context = Context(context_id, contents)
    return System(
        contents,
        (context,),
        {context_id: Bunch(context, bunch.joint)},
        {Observable(q, context_id): s for q, s in zip(contents, supports, strict=True)},
    )


def _die_indicators(die: Distribution) -> System:
    """A = outcome even, B = outcome exceeds 3, both functions of one roll."""
    joint = die.pushforward(lambda v: f"{int(int(v) % 2 == 0)} {int(int(v) > 3)}")
    context = Context("roll", ("A", "B"))
    bunch = Bunch(context, {tuple(v.split()): m for v, m in joint.as_dict().items()})
    return _single_context("roll", ("A", "B"), (INDICATOR, INDICATOR), bunch)


def _fair_die(params: dict) -> System:
    return _die_indicators(Distribution(DIE_FACES, _masses(params["die"], 6, "die")))


def _two_dice(params: dict) -> System:
    context = Context("trial", ("left", "right"))
    left = Distribution(DIE_FACES, _masses(params["left"], 6, "left"))
    right = Distribution(DIE_FACES, _masses(params["right"], 6, "right"))
    return _single_context("trial", ("left", "right"), (DIE_FACES, DIE_FACES), product_bunch(context, left, right))


def _luce(params: dict) -> System:
    contexts, bunches, supports = [], {}, {}
    for context_id in ("irvine-tuesday", "lafayette-friday"):
        p = _probability(params[context_id], context_id)
        context = Context(context_id, ("outcome",))
        contexts.append(context)
        bunches[context_id] = Bunch(context, {("1",): p, ("0",): 1 - p})
        supports[Observable("outcome", context_id)] = INDICATOR
    return System(("outcome",), tuple(contexts), bunches, supports)


def _expectation_mass(e: Fraction, name: str) -> Fraction:
    if not -1 <= e <= 1:
        msg = f"expectation of {name} must lie in [-1, 1], got {e}"
        raise errors.BadParameter(msg)
    return (1 + e) / 2


def _survey_four(params: dict) -> System:
    expectations = params["expectations"]
    contexts, bunches, supports = [], {}, {}
    for content in ("a1", "a2", "b1", "b2"):
        p = _expectation_mass(to_rational(expectations[content]), content)
        context = Context(content, (content,))
        contexts.append(context)
        bunches[content] = Bunch(context, {("+1",): p, ("-1",): 1 - p})
        supports[Observable(content, content)] = PLUS_MINUS
    return System(("a1", "a2", "b1", "b2"), tuple(contexts), bunches, supports)


def cyclic_system(joints: Mapping[tuple[int, int], Mapping[tuple[str, str], Fraction]]) -> System:
    """The 2x2 system with contents ``a1, a2, b1, b2`` and the given joint masses.

    Parameters
    ----------
    joints
        ``(i, j)`` -> joint masses of ``(ai, bj)`` in context ``ai-bj``, keyed by ``+1``/``-1``
        pairs. Missing pairs have mass zero.
    """
    contexts, bunches, supports = [], {}, {}
    for (i, j), joint in sorted(joints.items()):
        context = Context(f"a{i}-b{j}", (f"a{i}", f"b{j}"))
        contexts.append(context)
        bunches[context.id] = Bunch(context, dict(joint))
        supports[Observable(f"a{i}", context.id)] = PLUS_MINUS
        supports[Observable(f"b{j}", context.id)] = PLUS_MINUS
    return System(("a1", "a2", "b1", "b2"), tuple(contexts), bunches, supports)


def pair_joint(e_a: Fraction, e_b: Fraction, e_ab: Fraction) -> dict[tuple[str, str], Fraction]:
    """Joint masses of two ``+1``/``-1`` variables with expectations ``e_a``, ``e_b`` and product
    expectation ``e_ab``.

    Raises
    ------
    ~couplecheck.errors.BadParameter
        if no such joint distribution exists.
    """
    joint = {
        ("+1", "+1"): (1 + e_a + e_b + e_ab) / 4,
        ("+1", "-1"): (1 + e_a - e_b - e_ab) / 4,
        ("-1", "+1"): (1 - e_a + e_b - e_ab) / 4,
        ("-1", "-1"): (1 - e_a - e_b + e_ab) / 4,
    }
    if any(m < 0 for m in joint.values()):
        msg = f"no joint distribution has expectations {e_a}, {e_b} and product expectation {e_ab}"
        raise errors.BadParameter(msg)
    return joint


def selective_cyclic_system(
    correlations: Mapping[tuple[int, int], Fraction],
    expectations: Mapping[str, Fraction] | None = None,
) -> System:
    """The marginally selective 2x2 system with the given expectations and product expectations.

    ``expectations`` maps ``a1, a2, b1, b2`` to their (context-independent) expectations, all
    zero by default.
    """
    e = {q: Fraction(0) for q in ("a1", "a2", "b1", "b2")} | dict(expectations or {})
    return cyclic_system(
        {(i, j): pair_joint(e[f"a{i}"], e[f"b{j}"], to_rational(c)) for (i, j), c in correlations.items()}
    )


def _correlations(params: dict) -> dict[tuple[int, int], Fraction]:
    correlations = params["correlations"]
    return {(i, j): to_rational(correlations[f"a{i}-b{j}"]) for i in (1, 2) for j in (1, 2)}


def _survey_paired(params: dict) -> System:
    expectations = {q: to_rational(e) for q, e in params["expectations"].items()}
    return selective_cyclic_system(_correlations(params), expectations)


def _epr(params: dict) -> System:
    return selective_cyclic_system(_correlations(params))


def _pr_box(_: dict) -> System:
    return selective_cyclic_system({(1, 1): Fraction(1), (1, 2): Fraction(1), (2, 1): Fraction(1), (2, 2): Fraction(-1)})


def _tsirelson(params: dict) -> System:
    c = to_rational(params["magnitude"])
    if not 0 <= c <= 1:
        msg = f"magnitude must lie in [0, 1], got {c}"
        raise errors.BadParameter(msg)
    return selective_cyclic_system({(1, 1): c, (1, 2): c, (2, 1): c, (2, 2): -c})


def _answers(params: dict, context_id: str, contents: tuple[str, str]) -> tuple[Context, Bunch]:
    masses = _masses(params[context_id], 4, context_id)
    context = Context(context_id, contents)
    cells = [(x, y) for x in YES_NO for y in YES_NO]
    return context, Bunch(context, dict(zip(cells, masses, strict=True)))


def _question_order(params: dict, layout: dict[str, tuple[str, str]]) -> System:
    contexts, bunches, supports = [], {}, {}
    for context_id, contents in layout.items():
        context, bunch = _answers(params, context_id, contents)
        contexts.append(context)
        bunches[context_id] = bunch
        for q in contents:
            supports[Observable(q, context_id)] = YES_NO
    contents = sorted({q for c in layout.values() for q in c})
    return System(tuple(contents), tuple(contexts), bunches, supports)


def _question_order_shared(params: dict) -> System:
    return _question_order(params, {"a-b": ("a", "b"), "b-a": ("a", "b")})


def _question_order_split(params: dict) -> System:
    return _question_order(params, {"a1-b2": ("a1", "b2"), "b1-a2": ("b1", "a2")})


_BUILDERS: dict[ScenarioId, Callable[[dict], System]] = {
    ScenarioId.FAIR_DIE_AB: _fair_die,
    ScenarioId.RIGGED_DIE_AB: _fair_die,
    ScenarioId.TWO_DICE_MARKED: _two_dice,
    ScenarioId.LUCE_TWO_CITIES: _luce,
    ScenarioId.SURVEY_FOUR_CONTEXTS: _survey_four,
    ScenarioId.SURVEY_PAIRED_CONTEXTS: _survey_paired,
    ScenarioId.QUESTION_ORDER_SHARED: _question_order_shared,
    ScenarioId.QUESTION_ORDER_SPLIT: _question_order_split,
    ScenarioId.EPR_UNIFORM: _epr,
    ScenarioId.PR_BOX: _pr_box,
    ScenarioId.TSIRELSON_RATIONAL: _tsirelson,
}
