# ruff: noqa: PLC0415

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest


@pytest.fixture(scope="module")
def die():
    from couplecheck.system import Distribution

    return Distribution.uniform([str(v) for v in range(1, 7)])


def test_independent_coupling_of_two_dice(die):
    from couplecheck.coupling import connection_system, independent_coupling, verify_coupling

    coupling = independent_coupling(connection_system([die, die], "die"))

    assert len(coupling.atoms) == 36
    assert set(coupling.atoms.values()) == {Fraction(1, 36)}
    assert verify_coupling(coupling).ok
    assert [str(obs) for obs in coupling.observables] == ["die@c1", "die@c2"]


def test_identity_coupling_of_two_dice(die):
    from couplecheck.coupling import identity_coupling, verify_coupling

    coupling = identity_coupling([die, die], "die")

    assert coupling.atoms == {(v, v): Fraction(1, 6) for v in die.support}
    assert verify_coupling(coupling).ok
    assert coupling.equality_probability(coupling.observables) == 1


def test_anticorrelated_coupling_of_two_dice(die):
    from couplecheck.coupling import deterministic_coupling, verify_coupling

    coupling = deterministic_coupling(die, lambda v: str(7 - int(v)), codomain=die.support, content="die")

    assert len(coupling.atoms) == 6
    assert all(int(x) + int(y) == 7 for x, y in coupling.atoms)
    assert set(coupling.atoms.values()) == {Fraction(1, 6)}
    assert verify_coupling(coupling).ok
    assert coupling.equality_probability(coupling.observables) == 0


def test_deterministic_coupling_needs_a_bijection(die):
    from couplecheck import errors
    from couplecheck.coupling import deterministic_coupling

    with pytest.raises(errors.NotABijection):
        deterministic_coupling(die, lambda v: str(int(v) % 2))
    with pytest.raises(errors.NotABijection):
        deterministic_coupling(die, {"1": "a"})
    with pytest.raises(errors.NotABijection):
        deterministic_coupling(die, lambda v: v, codomain=[*die.support, "7"])


def test_identity_coupling_needs_equal_distributions(die):
    from couplecheck import errors
    from couplecheck.coupling import identity_coupling
    from couplecheck.system import Distribution

    rigged = Distribution(die.support, (0, *(Fraction(1, 4),) * 4, 0))
    with pytest.raises(errors.DistributionsDiffer):
        identity_coupling([die, rigged])


def test_coupling_of_marked_dice():
    """The only coupling of a single bunch is the bunch itself."""
    from couplecheck.coupling import independent_coupling, maximally_connected_coupling
    from couplecheck.scenarios import build

    system = build("two-dice-marked")
    coupling = independent_coupling(system)

    assert len(coupling.atoms) == 36
    assert set(coupling.atoms.values()) == {Fraction(1, 36)}
    assert maximally_connected_coupling(system).atoms == coupling.atoms


def test_coupling_queries(die):
    from couplecheck.coupling import connection_system, independent_coupling
    from couplecheck.system import Observable

    system = connection_system([die, die, die])
    coupling = independent_coupling(system)
    first, second, _ = coupling.observables

    assert coupling.equality_probability([first, second]) == Fraction(1, 6)
    assert coupling.equality_probability(coupling.observables) == Fraction(1, 36)
    assert coupling.marginal([first]) == {(v,): Fraction(1, 6) for v in die.support}
    assert coupling.probability(lambda values: values[Observable("q", "c1")] == "6") == Fraction(1, 6)


@pytest.mark.parametrize(
    ("p1", "p2"),
    [(Fraction(7, 10), Fraction(1, 2)), (Fraction(1), Fraction(0)), (Fraction(1, 3), Fraction(1, 3))],
)
def test_max_equality_probability(p1, p2):
    from couplecheck.coupling import max_equality_probability
    from couplecheck.system import Distribution

    d1 = Distribution(("1", "0"), (p1, 1 - p1))
    d2 = Distribution(("1", "0"), (p2, 1 - p2))
    assert max_equality_probability(d1, d2) == 1 - abs(p1 - p2)


def test_max_equality_over_different_supports():
    from couplecheck.coupling import max_equality_probability
    from couplecheck.system import Distribution

    d1 = Distribution.from_mapping({"a": "1/2", "b": "1/2"})
    d2 = Distribution.from_mapping({"b": "1/4", "c": "3/4"})
    assert max_equality_probability(d1, d2) == Fraction(1, 4)


def test_max_equality_is_sharp_on_random_pairs():
    """Sum of minima is attainable, and nothing above it is."""
    from couplecheck.coupling import (
        ConnectionTarget,
        connection_system,
        couple_with_equality_targets,
        max_equality_probability,
        verify_coupling,
    )
    from couplecheck.random_systems import random_binary_distribution

    rng = np.random.default_rng(42)
    for _ in range(1000):
        d1 = random_binary_distribution(rng, support=("1", "0"))
        d2 = random_binary_distribution(rng, support=("1", "0"))
        best = max_equality_probability(d1, d2)
        assert best == 1 - abs(d1.mass("1") - d2.mass("1"))

        system = connection_system([d1, d2])
        coupling = couple_with_equality_targets(system, [ConnectionTarget("q", best)])
        assert coupling is not None
        assert verify_coupling(coupling).ok
        assert coupling.equality_probability(coupling.observables) == best

        if best < 1:
            above = min(Fraction(1), best + Fraction(1, 128))
            assert couple_with_equality_targets(system, [ConnectionTarget("q", above)]) is None


def test_luce_two_cities():
    """Two never-paired measurements can be coupled in many ways, but not identically."""
    from couplecheck import errors
    from couplecheck.coupling import (
        identity_connected_coupling,
        independent_coupling,
        maximally_connected_coupling,
    )
    from couplecheck.scenarios import build

    system = build("luce-two-cities")
    connection = system.connection("outcome").observables

    assert independent_coupling(system).equality_probability(connection) == Fraction(1, 2)
    assert maximally_connected_coupling(system).equality_probability(connection) == Fraction(4, 5)
    with pytest.raises(errors.DistributionsDiffer):
        identity_connected_coupling(system)


def test_independent_coupling_is_not_maximal():
    """With uniform marginals the independent coupling makes each connection equal with
    probability 1/2, while a maximally connected coupling needs 1."""
    from couplecheck.coupling import independent_coupling, maximal_targets, maximally_connected_coupling
    from couplecheck.scenarios import build

    system = build("epr-uniform")
    independent = independent_coupling(system)
    maximal = maximally_connected_coupling(system)

    assert {t.required_equality_probability for t in maximal_targets(system)} == {1}
    for connection in system.connections():
        assert independent.equality_probability(connection.observables) == Fraction(1, 2)
        assert maximal.equality_probability(connection.observables) == 1


def test_identity_connected_coupling():
    from couplecheck.coupling import identity_connected_coupling, verify_coupling
    from couplecheck.scenarios import build

    survey = build("survey-four-contexts")
    coupling = identity_connected_coupling(survey)
    assert verify_coupling(coupling).ok
    assert len(coupling.atoms) == 16

    epr = build("epr-uniform")
    assert verify_coupling(identity_connected_coupling(epr)).ok

    assert identity_connected_coupling(build("pr-box")) is None


def test_pr_box_has_no_maximal_coupling():
    from couplecheck.coupling import maximally_connected_coupling
    from couplecheck.scenarios import build

    assert maximally_connected_coupling(build("pr-box")) is None


def test_target_errors(die):
    from couplecheck import errors
    from couplecheck.coupling import (
        ConnectionTarget,
        connection_system,
        couple_with_equality_targets,
        maximally_connected_coupling,
    )

    with pytest.raises(errors.BadParameter):
        ConnectionTarget("q", Fraction(3, 2))

    system = connection_system([die, die])
    with pytest.raises(errors.UnknownConnection):
        couple_with_equality_targets(system, [ConnectionTarget("nothing", Fraction(1))])

    with pytest.raises(errors.ConnectionArityUnsupported):
        maximally_connected_coupling(connection_system([die, die, die]))


def test_verify_coupling_reports_mismatches():
    from couplecheck.coupling import Coupling, independent_coupling, verify_coupling
    from couplecheck.scenarios import build

    system = build("pr-box")
    wrong = Coupling(system, {("+1",) * 8: Fraction(1)})
    check = verify_coupling(wrong)

    assert not check.ok
    assert {context for context, *_ in check.violations} == {"a1-b1", "a1-b2", "a2-b1", "a2-b2"}

    unnormalized = Coupling(system, dict(list(independent_coupling(system).atoms.items())[:-1]))
    assert (None, None, Fraction(1), sum(unnormalized.atoms.values())) in verify_coupling(unnormalized).violations


def test_coupling_problem_layout():
    from couplecheck.coupling import ConnectionTarget, coupling_problem
    from couplecheck.scenarios import build

    system = build("pr-box")
    problem, atoms = coupling_problem(system, [ConnectionTarget("a1", Fraction(1))])

    assert len(atoms) == 2**8
    assert problem.shape == (4 * 4 + 1, 2**8)
    assert atoms[0] == ("+1",) * 8
    assert atoms[-1] == ("-1",) * 8


def _relabel(system, content, context, value):
    """``system`` with contents, contexts and (per content) values renamed by the given maps."""
    from couplecheck.system import Bunch, Context, Observable, System

    contexts = {c.id: Context(context[c.id], tuple(content[q] for q in c.measured)) for c in system.contexts}
    bunches = {}
    for context_id, bunch in system.bunches.items():
        measured = system.context(context_id).measured
        joint = {
            tuple(value(q, v) for q, v in zip(measured, values, strict=True)): m for values, m in bunch.joint.items()
        }
        bunches[context[context_id]] = Bunch(contexts[context_id], joint)
    supports = {
        Observable(content[obs.content], context[obs.context]): tuple(value(obs.content, v) for v in values)
        for obs, values in system.supports.items()
    }
    return System(tuple(content[q] for q in system.contents), tuple(contexts.values()), bunches, supports)


def test_coupling_existence_is_invariant_under_relabeling():
    from couplecheck.coupling import maximal_targets, maximally_connected_coupling, verify_coupling
    from couplecheck.random_systems import random_cyclic_system, random_selective_system
    from couplecheck.scenarios import build
    from couplecheck.system import validate_system

    rng = np.random.default_rng(99)
    systems = [build("pr-box"), build("epr-uniform"), build("tsirelson-rational")]
    systems += [random_cyclic_system(rng) for _ in range(10)]
    systems += [random_selective_system(rng) for _ in range(10)]

    # reverses the canonical order of contents and contexts.
    content = {"a1": "w", "a2": "v", "b1": "u", "b2": "t"}
    flip = {"+1": "-1", "-1": "+1"}

    verdicts = set()
    for system in systems:
        context = {c.id: f"k{9 - k}" for k, c in enumerate(system.contexts)}
        relabeled = validate_system(_relabel(system, content, context, lambda q, v: flip[v] if q == "a1" else v))

        assert {(content[t.content], t.required_equality_probability) for t in maximal_targets(system)} == {
            (t.content, t.required_equality_probability) for t in maximal_targets(relabeled)
        }

        witness = maximally_connected_coupling(system)
        relabeled_witness = maximally_connected_coupling(relabeled)
        assert (witness is None) == (relabeled_witness is None)
        if relabeled_witness is not None:
            assert verify_coupling(relabeled_witness).ok
        verdicts.add(witness is not None)

    assert verdicts == {True, False}
