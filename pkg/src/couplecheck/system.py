"""Contents, contexts, bunches and systems of discrete random variables.

A system measures a set of *contents* in a set of *contexts*. The measurements made within one
context are jointly distributed (their joint distribution is the *bunch* of the context), while
measurements made in different contexts are stochastically unrelated: they have no joint
distribution at all.

All probabilities are :class:`fractions.Fraction` and all comparisons are exact. Events are
arbitrary subsets of a (finite) support, i.e. the sigma-algebra is always the power set.
"""

from __future__ import annotations

import itertools
import logging
import re
from collections.abc import Callable, Collection, Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from . import errors

log = logging.getLogger(__name__)

#: symbolic value label, e.g. ``"+1"`` or ``"6"``.
Value = str
#: content (object) id.
Content = str

_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")


def to_rational(value: Fraction | int | str) -> Fraction:
    """Convert ``value`` to an exact rational.

    Strings must be integers or fractions ``p/q``. Floats and decimal literals are rejected, so
    that no rounded number can ever enter a computation.
    """
    if isinstance(value, bool):
        msg = f"not a rational number: {value!r}"
        raise errors.ParseError(msg)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str) and _RATIONAL.match(value.strip()):
        if value.strip().endswith("/0"):
            msg = f"zero denominator in {value!r}"
            raise errors.ParseError(msg)
        return Fraction(value.strip())

    msg = f"fractions only (p/q), got {value!r}"
    raise errors.ParseError(msg)


def format_rational(value: Fraction) -> str:
    """Canonical ``p/q`` representation, also for integers (``4/1``)."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Distribution:
    """A distribution over a finite, ordered support.

    Parameters
    ----------
    support
        pairwise distinct value labels.
    masses
        probability masses aligned with ``support``; nonnegative and summing to exactly one.
    """

    support: tuple[Value, ...]
    masses: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "masses", tuple(to_rational(m) for m in self.masses))

        if len(self.support) != len(self.masses):
            msg = f"{len(self.support)} values but {len(self.masses)} masses"
            raise errors.ArityMismatch(msg)
        if len(set(self.support)) != len(self.support):
            msg = f"repeated value in support {self.support}"
            raise errors.DuplicateValue(msg)
        for value, mass in zip(self.support, self.masses, strict=True):
            if mass < 0:
                msg = f"negative mass {mass} of value {value}"
                raise errors.NegativeMass(msg, values=(value,))
        if sum(self.masses) != 1:
            msg = f"masses sum to {sum(self.masses)}, not 1"
            raise errors.MassNotNormalized(msg)

    @classmethod
    def from_mapping(cls, mapping: Mapping[Value, Fraction | int | str]) -> Distribution:
        """Build a distribution from a ``value -> mass`` mapping, keeping its order."""
        return cls(tuple(mapping), tuple(to_rational(m) for m in mapping.values()))

    @classmethod
    def uniform(cls, support: Iterable[Value]) -> Distribution:
        support = tuple(support)
        return cls(support, (Fraction(1, len(support)),) * len(support))

    @classmethod
    def point_mass(cls, value: Value, support: Iterable[Value] | None = None) -> Distribution:
        """All the mass on ``value``, optionally within a larger ``support``."""
        support = (value,) if support is None else tuple(support)
        return cls(support, tuple(Fraction(v == value) for v in support))

    def mass(self, value: Value) -> Fraction:
        """Mass of ``value``; zero for values outside the support."""
        try:
            return self.masses[self.support.index(value)]
        except ValueError:
            return Fraction(0)

    def probability(self, event: Collection[Value]) -> Fraction:
        """Probability of the event ``event``, a subset of the values."""
        return sum((m for v, m in zip(self.support, self.masses, strict=True) if v in event), Fraction(0))

    def pushforward(self, mapping: Callable[[Value], Value]) -> Distribution:
        """Distribution of ``mapping(X)``, with the image values in order of first appearance."""
        image: dict[Value, Fraction] = {}
        for value, mass in zip(self.support, self.masses, strict=True):
            image[mapping(value)] = image.get(mapping(value), Fraction(0)) + mass
        return Distribution.from_mapping(image)

    def as_dict(self) -> dict[Value, Fraction]:
        return dict(zip(self.support, self.masses, strict=True))

    def nonzero(self) -> dict[Value, Fraction]:
        return {v: m for v, m in zip(self.support, self.masses, strict=True) if m != 0}

    def same_law(self, other: Distribution) -> bool:
        """Whether both put the same mass on every value. Declared values of mass zero do not count."""
        return self.nonzero() == other.nonzero()


@dataclass(frozen=True)
class Context:
    """A context, i.e. the conditions under which the contents ``measured`` are recorded together."""

    id: str
    measured: tuple[Content, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "measured", tuple(self.measured))


class Observable(NamedTuple):
    """The measurement of a content in a context."""

    content: Content
    context: str

    def __str__(self) -> str:
        return f"{self.content}@{self.context}"


class Connection(NamedTuple):
    """All measurements of one content, each in a different context."""

    content: Content
    observables: tuple[Observable, ...]


@dataclass(frozen=True, eq=False)
class Bunch:
    """The joint distribution of all measurements in one context.

    ``joint`` maps value tuples, one coordinate per entry of ``context.measured`` (in that order),
    to their probability masses. Tuples missing from ``joint`` have mass zero, so two bunches are
    equal iff they agree on the tuples with nonzero mass.
    """

    context: Context
    joint: Mapping[tuple[Value, ...], Fraction]

    def __post_init__(self) -> None:
        object.__setattr__(self, "joint", {tuple(k): to_rational(m) for k, m in self.joint.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Bunch):
            return NotImplemented
        return self.context == other.context and self.nonzero() == other.nonzero()

    __hash__ = None

    def nonzero(self) -> dict[tuple[Value, ...], Fraction]:
        return {k: m for k, m in self.joint.items() if m != 0}

    def index(self, content: Content) -> int:
        try:
            return self.context.measured.index(content)
        except ValueError:
            msg = f"content {content} is not measured in context {self.context.id}"
            raise errors.ContentNotInContext(msg) from None

    def probability(self, predicate: Callable[[tuple[Value, ...]], bool]) -> Fraction:
        return sum((m for values, m in self.joint.items() if predicate(values)), Fraction(0))


@dataclass(frozen=True)
class System:
    """A family of stochastically unrelated bunches, one per context.

    Contents and contexts are kept in canonical (lexicographic) order. Construction does not
    validate anything, use :func:`validate_system` for that.

    Parameters
    ----------
    contents
        the content ids.
    contexts
        the contexts, each listing the contents it measures.
    bunches
        context id -> bunch of that context.
    supports
        observable -> ordered list of the values that observable can take.
    """

    contents: tuple[Content, ...]
    contexts: tuple[Context, ...]
    bunches: Mapping[str, Bunch]
    supports: Mapping[Observable, tuple[Value, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "contents", tuple(sorted(self.contents)))
        object.__setattr__(self, "contexts", tuple(sorted(self.contexts, key=lambda c: c.id)))
        object.__setattr__(self, "bunches", dict(sorted(self.bunches.items())))
        object.__setattr__(
            self,
            "supports",
            {Observable(*obs): tuple(vals) for obs, vals in sorted(self.supports.items())},
        )

    def context(self, context_id: str) -> Context:
        for context in self.contexts:
            if context.id == context_id:
                return context
        msg = f"no context {context_id}"
        raise errors.UnknownContext(msg, context=context_id)

    def bunch(self, context_id: str) -> Bunch:
        return self.bunches[context_id]

    def support(self, observable: Observable) -> tuple[Value, ...]:
        return self.supports[observable]

    def observables(self) -> tuple[Observable, ...]:
        """All observables, ordered by content and then by context."""
        return tuple(sorted(Observable(q, c.id) for c in self.contexts for q in c.measured))

    def connections(self) -> tuple[Connection, ...]:
        """The observables grouped by content, in canonical order."""
        grouped: dict[Content, list[Observable]] = {}
        for obs in self.observables():
            grouped.setdefault(obs.content, []).append(obs)
        return tuple(Connection(q, tuple(obs)) for q, obs in grouped.items())

    def connection(self, content: Content) -> Connection:
        for connection in self.connections():
            if connection.content == content:
                return connection
        msg = f"content {content} is not measured in any context"
        raise errors.UnknownConnection(msg)

    def marginal(self, observable: Observable) -> Distribution:
        """Distribution of a single observable, over its declared support."""
        return marginal(self.bunch(observable.context), observable.content, self.support(observable))


def validate_system(system: System) -> System:
    """Check every invariant of ``system`` and return it unchanged if they all hold.

    Raises
    ------
    ~couplecheck.errors.InvalidSystemError
        listing every violation found, not just the first one.
    """
    violations = list(_system_violations(system))
    if violations:
        log.debug("system has %d violation(s)", len(violations))
        raise errors.InvalidSystemError(violations)
    return system


def _system_violations(system: System) -> Iterable[errors.SystemViolation]:
    contents = set(system.contents)
    for content in sorted({q for q in system.contents if system.contents.count(q) > 1}):
        yield errors.DuplicateContent(f"content {content} is declared more than once", content=content)

    seen_contexts: set[str] = set()
    measured_anywhere: set[Content] = set()
    for context in system.contexts:
        if context.id in seen_contexts:
            yield errors.DuplicateContext(f"context {context.id} is declared more than once", context=context.id)
            continue
        seen_contexts.add(context.id)

        if not context.measured:
            yield errors.EmptyContext(f"context {context.id} measures nothing", context=context.id)
        for content in sorted({q for q in context.measured if context.measured.count(q) > 1}):
            yield errors.RepeatedContent(
                f"content {content} is measured more than once in context {context.id}",
                context=context.id,
                content=content,
            )
        for content in context.measured:
            measured_anywhere.add(content)
            if content not in contents:
                yield errors.UnknownContent(
                    f"context {context.id} measures undeclared content {content}",
                    context=context.id,
                    content=content,
                )
            if not system.supports.get(Observable(content, context.id)):
                yield errors.MissingSupport(
                    f"no support declared for {content} in context {context.id}",
                    context=context.id,
                    content=content,
                )
            elif len(set(vals := system.supports[Observable(content, context.id)])) != len(vals):
                yield errors.DuplicateValue(
                    f"repeated value in the support of {content} in context {context.id}",
                    context=context.id,
                    content=content,
                )

    for content in system.contents:
        if content not in measured_anywhere:
            yield errors.UnusedContent(f"content {content} is not measured in any context", content=content)

    for obs in system.supports:
        if obs.context not in seen_contexts:
            yield errors.UnknownContext(
                f"support declared for undeclared context {obs.context}", context=obs.context, content=obs.content
            )
        elif obs.content not in system.context(obs.context).measured:
            yield errors.UnknownContent(
                f"support declared for {obs.content}, which context {obs.context} does not measure",
                context=obs.context,
                content=obs.content,
            )

    for context_id in system.bunches:
        if context_id not in seen_contexts:
            yield errors.UnknownContext(f"bunch given for undeclared context {context_id}", context=context_id)

    for context_id in sorted(seen_contexts):
        if context_id not in system.bunches:
            yield errors.MissingBunch(f"no bunch given for context {context_id}", context=context_id)
            continue
        yield from _bunch_violations(system, system.context(context_id), system.bunches[context_id])


def _bunch_violations(system: System, context: Context, bunch: Bunch) -> Iterable[errors.SystemViolation]:
    if bunch.context != context:
        yield errors.UnknownContext(
            f"bunch of context {context.id} is declared for {bunch.context.id}", context=context.id
        )
        return

    supports = [system.supports.get(Observable(q, context.id), ()) for q in context.measured]
    for values, mass in bunch.joint.items():
        if len(values) != len(context.measured):
            yield errors.ArityMismatch(
                f"tuple {' '.join(values)} has {len(values)} values, context {context.id} "
                f"measures {len(context.measured)} contents",
                context=context.id,
                values=values,
            )
        else:
            for content, value, support in zip(context.measured, values, supports, strict=True):
                if support and value not in support:
                    yield errors.UnknownValue(
                        f"value {value} of {content} in context {context.id} is not in its support",
                        context=context.id,
                        content=content,
                        values=values,
                    )
        if mass < 0:
            yield errors.NegativeMass(
                f"negative mass {mass} in context {context.id}", context=context.id, values=values
            )

    if (total := sum(bunch.joint.values(), Fraction(0))) != 1:
        yield errors.MassNotNormalized(
            f"masses of context {context.id} sum to {total}, not 1", context=context.id
        )


def joint_marginal(bunch: Bunch, targets: Iterable[Content]) -> dict[tuple[Value, ...], Fraction]:
    """Joint distribution of the contents ``targets`` of a bunch, as ``tuple -> mass``."""
    indices = [bunch.index(q) for q in targets]
    joint: dict[tuple[Value, ...], Fraction] = {}
    for values, mass in bunch.joint.items():
        key = tuple(values[i] for i in indices)
        joint[key] = joint.get(key, Fraction(0)) + mass
    return joint


def marginal(bunch: Bunch, target: Content, support: Iterable[Value] | None = None) -> Distribution:
    """Distribution of the content ``target`` in ``bunch``.

    Parameters
    ----------
    bunch
        the bunch to marginalize.
    target
        a content measured in the bunch's context.
    support
        the declared support of the observable. Without it, the support consists of the values
        occurring in the bunch, in order of first appearance.

    Raises
    ------
    ~couplecheck.errors.ContentNotInContext
        if ``target`` is not measured in the bunch's context.
    """
    masses = {(v,): m for (v,), m in joint_marginal(bunch, [target]).items()}
    values = tuple(support) if support is not None else tuple(v for (v,) in masses)
    return Distribution(values, tuple(masses.get((v,), Fraction(0)) for v in values))


def product_bunch(context: Context, *distributions: Distribution) -> Bunch:
    """The bunch in which the measured contents are independent with the given distributions."""
    if len(distributions) != len(context.measured):
        msg = f"context {context.id} measures {len(context.measured)} contents, got {len(distributions)} distributions"
        raise errors.ArityMismatch(msg, context=context.id)

    joint = {}
    for atoms in itertools.product(*(d.as_dict().items() for d in distributions)):
        mass = Fraction(1)
        for _, m in atoms:
            mass *= m
        joint[tuple(v for v, _ in atoms)] = mass
    return Bunch(context, joint)


def events_independent(
    bunch: Bunch,
    first: Content,
    second: Content,
    event_first: Collection[Value],
    event_second: Collection[Value],
) -> bool:
    """Whether the multiplication rule holds for two events of two contents of one bunch."""
    i, j = bunch.index(first), bunch.index(second)
    both = bunch.probability(lambda v: v[i] in event_first and v[j] in event_second)
    p_first = bunch.probability(lambda v: v[i] in event_first)
    p_second = bunch.probability(lambda v: v[j] in event_second)
    return both == p_first * p_second


def product_independence_test(bunch: Bunch) -> dict[tuple[Content, Content], bool]:
    """Check every pair of contents of ``bunch`` for stochastic independence.

    A pair is independent iff its joint mass factorizes into the two marginals for every pair of
    values, which (on a finite support) is the same as factorizing for every pair of events.

    Returns
    -------
    dict
        ``(first, second) -> independent``, for every pair in measurement order.
    """
    measured = bunch.context.measured
    if len(measured) < 2:
        msg = f"context {bunch.context.id} measures fewer than two contents"
        raise errors.ArityMismatch(msg, context=bunch.context.id)

    result = {}
    for first, second in itertools.combinations(measured, 2):
        d1, d2 = marginal(bunch, first), marginal(bunch, second)
        joint = joint_marginal(bunch, [first, second])
        result[(first, second)] = all(
            joint.get((v1, v2), Fraction(0)) == m1 * m2
            for v1, m1 in d1.as_dict().items()
            for v2, m2 in d2.as_dict().items()
        )
    return result
