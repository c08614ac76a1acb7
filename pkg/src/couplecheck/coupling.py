"""Couplings of stochastically unrelated bunches.

A coupling of a system is a single joint distribution over *all* its observables whose marginal
on the observables of each context is that context's bunch. Couplings always exist (the
independent one does) but are not unique, and a system is characterized by which special
couplings it admits.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from . import errors
from .lp import LinearSystem, solve_feasibility
from .system import (
    Bunch,
    Content,
    Context,
    Distribution,
    Observable,
    System,
    Value,
    to_rational,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Coupling:
    """A joint distribution of all observables of ``system``.

    ``atoms`` maps value tuples, one coordinate per entry of ``system.observables()``, to their
    masses. Only atoms with nonzero mass are stored.
    """

    system: System
    atoms: Mapping[tuple[Value, ...], Fraction]

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", {tuple(k): Fraction(m) for k, m in self.atoms.items() if m != 0})

    @property
    def observables(self) -> tuple[Observable, ...]:
        return self.system.observables()

    def probability(self, predicate: Callable[[dict[Observable, Value]], bool]) -> Fraction:
        """Probability of the event described by ``predicate`` (called with observable -> value)."""
        observables = self.observables
        return sum(
            (m for values, m in self.atoms.items() if predicate(dict(zip(observables, values, strict=True)))),
            Fraction(0),
        )

    def marginal(self, observables: Sequence[Observable]) -> dict[tuple[Value, ...], Fraction]:
        """Joint distribution of ``observables`` in this coupling, as ``tuple -> mass``."""
        positions = [self.observables.index(obs) for obs in observables]
        joint: dict[tuple[Value, ...], Fraction] = {}
        for values, mass in self.atoms.items():
            key = tuple(values[p] for p in positions)
            joint[key] = joint.get(key, Fraction(0)) + mass
        return joint

    def equality_probability(self, observables: Sequence[Observable]) -> Fraction:
        """Probability that all ``observables`` take one and the same value."""
        return sum((m for values, m in self.marginal(observables).items() if len(set(values)) <= 1), Fraction(0))

    def sorted_atoms(self) -> list[tuple[tuple[Value, ...], Fraction]]:
        """The atoms in canonical order, i.e. lexicographic in the support order of each observable."""
        supports = [self.system.support(obs) for obs in self.observables]

        def key(item: tuple[tuple[Value, ...], Fraction]) -> tuple[int, ...]:
            return tuple(s.index(v) for s, v in zip(supports, item[0], strict=True))

        return sorted(self.atoms.items(), key=key)


@dataclass(frozen=True)
class ConnectionTarget:
    """The probability with which all measurements of ``content`` are required to coincide."""

    content: Content
    required_equality_probability: Fraction

    def __post_init__(self) -> None:
        p = to_rational(self.required_equality_probability)
        object.__setattr__(self, "required_equality_probability", p)
        if not 0 <= p <= 1:
            msg = f"required equality probability of {self.content} must lie in [0, 1], got {p}"
            raise errors.BadParameter(msg)


class CouplingCheck(NamedTuple):
    ok: bool
    """Whether every bunch is reproduced exactly."""
    violations: list[tuple[str | None, tuple[Value, ...] | None, Fraction, Fraction]]
    """``(context, values, expected, actual)`` for every mismatch. ``context`` is ``None`` for
    mismatches of the coupling itself (negative masses, total mass)."""


def connection_system(distributions: Sequence[Distribution], content: Content = "q") -> System:
    """The system measuring one content in as many contexts as there are ``distributions``.

    Think of the contexts as mutually exclusive conditions (different dice, different days,
    different trials): each holds a single measurement, and no two are jointly distributed.
    """
    width = len(str(len(distributions)))
    contexts, bunches, supports = [], {}, {}
    for i, dist in enumerate(distributions):
        context = Context(f"c{i + 1:0{width}d}", (content,))
        contexts.append(context)
        bunches[context.id] = Bunch(context, {(v,): m for v, m in dist.as_dict().items()})
        supports[Observable(content, context.id)] = dist.support
    return System((content,), tuple(contexts), bunches, supports)


def independent_coupling(system: System) -> Coupling:
    """The coupling in which the bunches of the different contexts are independent."""
    observables = system.observables()
    positions = {obs: i for i, obs in enumerate(observables)}

    per_context = []
    for context in system.contexts:
        slots = [positions[Observable(q, context.id)] for q in context.measured]
        per_context.append([(slots, values, m) for values, m in system.bunch(context.id).joint.items() if m])

    atoms = {}
    for combination in itertools.product(*per_context):
        full: list[Value] = [""] * len(observables)
        mass = Fraction(1)
        for slots, values, m in combination:
            for slot, value in zip(slots, values, strict=True):
                full[slot] = value
            mass *= m
        atoms[tuple(full)] = mass
    return Coupling(system, atoms)


def _require_identical(distributions: Sequence[Distribution], what: str) -> None:
    first = distributions[0]
    for dist in distributions[1:]:
        if not dist.same_law(first):
            msg = f"{what}: distributions {first.nonzero()} and {dist.nonzero()} differ, no identity coupling exists"
            raise errors.DistributionsDiffer(msg)


def identity_coupling(connection_dists: Sequence[Distribution], content: Content = "q") -> Coupling:
    """Couple identically distributed variables so that they are equal with probability one.

    Raises
    ------
    ~couplecheck.errors.DistributionsDiffer
        if the distributions are not all the same.
    """
    _require_identical(connection_dists, f"connection of {content}")
    system = connection_system(connection_dists, content)
    dist = connection_dists[0]
    return Coupling(system, {(v,) * len(connection_dists): m for v, m in dist.nonzero().items()})


def deterministic_coupling(
    d: Distribution,
    mapping: Mapping[Value, Value] | Callable[[Value], Value],
    codomain: Iterable[Value] | None = None,
    content: Content = "q",
) -> Coupling:
    """Couple ``d`` with the distribution of ``mapping(d)`` by pairing every value with its image.

    Parameters
    ----------
    d
        the distribution of the first variable.
    mapping
        a bijection from ``d.support`` onto the support of the second variable.
    codomain
        the support of the second variable. If given, ``mapping`` has to be onto it.

    Raises
    ------
    ~couplecheck.errors.NotABijection
        if two values share an image, or the images do not cover ``codomain``.
    """
    f = mapping.get if isinstance(mapping, Mapping) else mapping
    images = [f(v) for v in d.support]
    if None in images:
        msg = f"mapping is not defined on all of {d.support}"
        raise errors.NotABijection(msg)
    if len(set(images)) != len(images):
        msg = f"mapping sends two values to the same image: {dict(zip(d.support, images, strict=True))}"
        raise errors.NotABijection(msg)
    if codomain is not None and set(codomain) != set(images):
        msg = f"images {images} do not cover {list(codomain)}"
        raise errors.NotABijection(msg)

    pushforward = Distribution(tuple(images), d.masses)
    system = connection_system([d, pushforward], content)
    return Coupling(system, {(v, w): m for v, w, m in zip(d.support, images, d.masses, strict=True)})


def max_equality_probability(d1: Distribution, d2: Distribution) -> Fraction:
    """The largest probability with which two variables distributed as ``d1``, ``d2`` can coincide.

    This is the sum over all values of the smaller of the two masses. For binary variables it is
    one minus the absolute difference of the probabilities of either value.
    """
    values = dict.fromkeys([*d1.support, *d2.support])
    return sum((min(d1.mass(v), d2.mass(v)) for v in values), Fraction(0))


def coupling_problem(
    system: System, targets: Sequence[ConnectionTarget] = ()
) -> tuple[LinearSystem, list[tuple[Value, ...]]]:
    """Formulate the existence of a coupling with the given ``targets`` as a feasibility problem.

    The unknowns are the masses of all atoms, in canonical order. There is one row per context
    and value tuple of that context (its marginal mass must equal the bunch mass) and one row
    per target (the probability that not all measurements of the content coincide must be one
    minus the target).

    Returns
    -------
    tuple
        ``(problem, atoms)``, ``atoms[j]`` being the value tuple of the ``j``-th unknown.
    """
    observables = system.observables()
    atoms = list(itertools.product(*(system.support(obs) for obs in observables)))
    positions = {obs: i for i, obs in enumerate(observables)}

    matrix: list[tuple[Fraction, ...]] = []
    rhs: list[Fraction] = []
    for context in system.contexts:
        slots = [positions[Observable(q, context.id)] for q in context.measured]
        joint = system.bunch(context.id).joint
        cells = itertools.product(*(system.support(Observable(q, context.id)) for q in context.measured))
        for cell in cells:
            matrix.append(tuple(Fraction(tuple(a[s] for s in slots) == cell) for a in atoms))
            rhs.append(joint.get(cell, Fraction(0)))

    for target in targets:
        slots = [positions[obs] for obs in system.connection(target.content).observables]
        matrix.append(tuple(Fraction(len({a[s] for s in slots}) > 1) for a in atoms))
        rhs.append(1 - target.required_equality_probability)

    names = tuple(",".join(a) for a in atoms)
    return LinearSystem(tuple(matrix), tuple(rhs), names), atoms


def couple_with_equality_targets(system: System, targets: Sequence[ConnectionTarget]) -> Coupling | None:
    """Find a coupling in which the measurements of each target content all coincide with exactly the
    required probability, or return ``None`` if there is none.

    Raises
    ------
    ~couplecheck.errors.UnknownConnection
        if a target names a content that the system does not measure.
    """
    known = {c.content for c in system.connections()}
    for target in targets:
        if target.content not in known:
            msg = f"no connection for content {target.content}"
            raise errors.UnknownConnection(msg)

    problem, atoms = coupling_problem(system, targets)
    log.debug(
        "coupling problem for targets %s: %d x %d",
        {t.content: str(t.required_equality_probability) for t in targets},
        *problem.shape,
    )
    result = solve_feasibility(problem)
    if not result.feasible:
        return None
    return Coupling(system, dict(zip(atoms, result.witness, strict=True)))


def maximal_targets(system: System) -> list[ConnectionTarget]:
    """The largest attainable equality probability of every connection with two measurements.

    Raises
    ------
    ~couplecheck.errors.ConnectionArityUnsupported
        for connections with more than two measurements.
    """
    targets = []
    for connection in system.connections():
        if len(connection.observables) == 1:
            continue
        if len(connection.observables) > 2:
            msg = (
                f"content {connection.content} is measured in {len(connection.observables)} contexts, "
                "maximal connectedness is only defined for pairs"
            )
            raise errors.ConnectionArityUnsupported(msg)
        first, second = (system.marginal(obs) for obs in connection.observables)
        targets.append(ConnectionTarget(connection.content, max_equality_probability(first, second)))
    return targets


def maximally_connected_coupling(system: System) -> Coupling | None:
    """A coupling in which every connection coincides with its largest attainable probability, or
    ``None`` if the system admits none (i.e. it is contextual)."""
    targets = maximal_targets(system)
    if not targets:
        return independent_coupling(system)
    return couple_with_equality_targets(system, targets)


def identity_connected_coupling(system: System) -> Coupling | None:
    """A coupling in which the measurements of every content coincide with probability one.

    If every context measures a single content, this is built directly: identity within each
    connection, independence across them. Otherwise the coupling has to be searched for, and
    may not exist.

    Raises
    ------
    ~couplecheck.errors.DistributionsDiffer
        if the measurements of some content are not identically distributed.
    """
    for connection in system.connections():
        _require_identical([system.marginal(obs) for obs in connection.observables], connection.content)

    if any(len(c.measured) > 1 for c in system.contexts):
        targets = [ConnectionTarget(c.content, Fraction(1)) for c in system.connections() if len(c.observables) > 1]
        return couple_with_equality_targets(system, targets)

    observables = system.observables()
    positions = {obs: i for i, obs in enumerate(observables)}
    per_connection = []
    for connection in system.connections():
        slots = [positions[obs] for obs in connection.observables]
        dist = system.marginal(connection.observables[0])
        per_connection.append([(slots, v, m) for v, m in dist.as_dict().items() if m])

    atoms = {}
    for combination in itertools.product(*per_connection):
        full: list[Value] = [""] * len(observables)
        mass = Fraction(1)
        for slots, value, m in combination:
            for slot in slots:
                full[slot] = value
            mass *= m
        atoms[tuple(full)] = mass
    return Coupling(system, atoms)


def verify_coupling(coupling: Coupling) -> CouplingCheck:
    """Check that ``coupling`` is a distribution that reproduces every bunch of its system exactly."""
    system = coupling.system
    violations: list[tuple[str | None, tuple[Value, ...] | None, Fraction, Fraction]] = []

    for values, mass in coupling.atoms.items():
        if mass < 0:
            violations.append((None, values, Fraction(0), mass))
    if (total := sum(coupling.atoms.values(), Fraction(0))) != 1:
        violations.append((None, None, Fraction(1), total))

    for context in system.contexts:
        observables = [Observable(q, context.id) for q in context.measured]
        actual = coupling.marginal(observables)
        expected = system.bunch(context.id).joint
        for cell in sorted(set(actual) | set(expected)):
            e, a = expected.get(cell, Fraction(0)), actual.get(cell, Fraction(0))
            if e != a:
                violations.append((context.id, cell, e, a))

    if violations:
        log.debug("coupling violates %d marginal condition(s)", len(violations))
    return CouplingCheck(not violations, violations)
