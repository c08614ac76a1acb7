"""Contextuality of systems of binary random variables.

The closed-form criteria apply to the 2x2 cyclic system: two contents ``A1, A2`` and two
contents ``B1, B2``, measured in the four contexts ``(i, j)`` that each record ``Ai`` together
with ``Bj``, all with values ``+1`` and ``-1``. Writing ``E_ij`` for the product expectation of
``Ai`` and ``Bj`` in context ``(i, j)``, the system is noncontextual iff

.. math::

    \\max_{k,l} \\left| \\sum_{i,j} E_{ij} - 2 E_{kl} \\right|
    \\le 2 + \\sum_i |E[A_i^{i1}] - E[A_i^{i2}]| + \\sum_j |E[B_j^{1j}] - E[B_j^{2j}]|

i.e. iff it admits a maximally connected coupling. Every verdict is computed by both routes
(and, for marginally selective systems, by a third one) so that they can be compared.
Other systems with shared contents are analysed by the coupling route only.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from . import errors
from .coupling import (
    Coupling,
    identity_connected_coupling,
    maximally_connected_coupling,
    verify_coupling,
)
from .lp import LinearSystem, solve_feasibility
from .system import Bunch, Content, Distribution, Observable, System, joint_marginal

log = logging.getLogger(__name__)

#: the two values of every observable of a cyclic system.
PLUS, MINUS = "+1", "-1"
BINARY = frozenset((PLUS, MINUS))

_INDICES = ((1, 1), (1, 2), (2, 1), (2, 2))


@dataclass(frozen=True)
class CyclicFourSystem:
    """A :class:`~couplecheck.system.System` oriented as a 2x2 cyclic system.

    Use :meth:`from_system` to build one, it checks the structure.
    """

    system: System
    a: tuple[Content, Content]
    """the contents ``A1, A2``."""
    b: tuple[Content, Content]
    """the contents ``B1, B2``."""
    contexts: dict[tuple[int, int], str]
    """``(i, j)`` -> id of the context measuring ``Ai`` and ``Bj``."""

    @classmethod
    def from_system(cls, system: System) -> CyclicFourSystem:
        """Recognize the cyclic structure of ``system``.

        The lexicographically smallest content becomes ``A1``, the smaller content measured
        together with it becomes ``B1``.

        Raises
        ------
        ~couplecheck.errors.StructuralMismatch
            if the system is not a 2x2 cyclic system; the message says why.
        ~couplecheck.errors.NonBinarySupport
            if it is, but not every support is ``{+1, -1}``.
        """
        if all(len(c.observables) < 2 for c in system.connections()):
            msg = "system has no shared contents across contexts"
            raise errors.StructuralMismatch(msg)
        if len(system.contexts) != 4 or len(system.contents) != 4:
            msg = (
                f"a 2x2 cyclic system has four contents in four contexts, got {len(system.contents)} "
                f"content(s) in {len(system.contexts)} context(s)"
            )
            raise errors.StructuralMismatch(msg)
        for context in system.contexts:
            if len(context.measured) != 2:
                msg = f"context {context.id} measures {len(context.measured)} content(s), not two"
                raise errors.StructuralMismatch(msg)
        for connection in system.connections():
            if len(connection.observables) != 2:
                msg = f"content {connection.content} is measured in {len(connection.observables)} context(s), not two"
                raise errors.StructuralMismatch(msg)

        def partner(context_id: str, content: Content) -> Content:
            first, second = system.context(context_id).measured
            return second if first == content else first

        a1 = system.contents[0]
        b1, b2 = sorted(partner(obs.context, a1) for obs in system.connection(a1).observables)
        if b1 == b2:
            msg = f"content {a1} is measured together with {b1} in both of its contexts"
            raise errors.StructuralMismatch(msg)
        (a2,) = set(system.contents) - {a1, b1, b2}
        contexts = {}
        for i, a in enumerate((a1, a2), start=1):
            for j, b in enumerate((b1, b2), start=1):
                matching = [c.id for c in system.contexts if set(c.measured) == {a, b}]
                if len(matching) != 1:
                    msg = f"contents {a} and {b} are not measured together in exactly one context"
                    raise errors.StructuralMismatch(msg)
                contexts[(i, j)] = matching[0]

        for obs, support in system.supports.items():
            if set(support) != BINARY or len(support) != 2:
                msg = f"support of {obs} is {list(support)}, not [+1, -1]"
                raise errors.NonBinarySupport(msg)

        log.debug("oriented cyclic system: A=%s B=%s contexts=%s", (a1, a2), (b1, b2), contexts)
        return cls(system, (a1, a2), (b1, b2), contexts)

    def bunch(self, i: int, j: int) -> Bunch:
        return self.system.bunch(self.contexts[(i, j)])

    def observable_a(self, i: int, j: int) -> Observable:
        return Observable(self.a[i - 1], self.contexts[(i, j)])

    def observable_b(self, i: int, j: int) -> Observable:
        return Observable(self.b[j - 1], self.contexts[(i, j)])

    def expectation_a(self, i: int, j: int) -> Fraction:
        """``E[Ai]`` in context ``(i, j)``."""
        return expectation(self.system.marginal(self.observable_a(i, j)))

    def expectation_b(self, i: int, j: int) -> Fraction:
        """``E[Bj]`` in context ``(i, j)``."""
        return expectation(self.system.marginal(self.observable_b(i, j)))

    def product_expectation(self, i: int, j: int) -> Fraction:
        """``E[Ai Bj]`` in context ``(i, j)``."""
        return correlation(self.bunch(i, j), self.a[i - 1], self.b[j - 1])


class SelectivityCheck(NamedTuple):
    holds: bool
    """Whether every connection is consistent (all its members identically distributed)."""
    detail: dict[Content, bool]
    """content -> whether its connection is consistent, in canonical content order."""


class ExtendedCheck(NamedTuple):
    noncontextual: bool
    """Whether ``lhs <= bound``."""
    lhs: Fraction
    """the CHSH value."""
    bound: Fraction
    """``2`` plus the total change of the marginal expectations across contexts."""


def _sign(value: str) -> int:
    return 1 if value == PLUS else -1


def expectation(marginal: Distribution) -> Fraction:
    """Expected value of a ``+1``/``-1`` variable.

    Raises
    ------
    ~couplecheck.errors.NonBinarySupport
        if the support is not ``{+1, -1}``.
    """
    if set(marginal.support) != BINARY or len(marginal.support) != 2:
        msg = f"expected support {{+1, -1}}, got {list(marginal.support)}"
        raise errors.NonBinarySupport(msg)
    return marginal.mass(PLUS) - marginal.mass(MINUS)


def correlation(bunch: Bunch, first: Content | None = None, second: Content | None = None) -> Fraction:
    """Product expectation ``E[XY]`` of two ``+1``/``-1`` contents of a bunch.

    Without ``first`` and ``second``, the bunch has to measure exactly two contents.
    """
    if first is None or second is None:
        if len(bunch.context.measured) != 2:
            msg = f"context {bunch.context.id} measures {len(bunch.context.measured)} content(s), need two"
            raise errors.ArityMismatch(msg, context=bunch.context.id)
        first, second = bunch.context.measured

    total = Fraction(0)
    for (x, y), mass in joint_marginal(bunch, [first, second]).items():
        if x not in BINARY or y not in BINARY:
            msg = f"value pair ({x}, {y}) in context {bunch.context.id} is not in {{+1, -1}}"
            raise errors.NonBinarySupport(msg)
        total += _sign(x) * _sign(y) * mass
    return total


def marginal_selectivity_check(s: CyclicFourSystem | System) -> SelectivityCheck:
    """Whether the distribution of every content is the same in all contexts measuring it."""
    system = s.system if isinstance(s, CyclicFourSystem) else s
    detail = {}
    for connection in system.connections():
        marginals = [system.marginal(obs) for obs in connection.observables]
        detail[connection.content] = all(m.same_law(marginals[0]) for m in marginals[1:])
    return SelectivityCheck(all(detail.values()), detail)


def chsh_value(s: CyclicFourSystem) -> Fraction:
    """The left-hand side of the CHSH inequality, maximized over the choice of the odd term.

    Always lies in ``[0, 4]``.
    """
    e = {ij: s.product_expectation(*ij) for ij in _INDICES}
    total = sum(e.values(), Fraction(0))
    return max(abs(total - 2 * e[kl]) for kl in _INDICES)


def extended_bound(s: CyclicFourSystem) -> Fraction:
    """``2`` plus the summed changes of the expectation of each content between its two contexts.

    Equal to 2 iff marginal selectivity holds. Always lies in ``[2, 10]``.
    """
    changes = [abs(s.expectation_a(i, 1) - s.expectation_a(i, 2)) for i in (1, 2)]
    changes += [abs(s.expectation_b(1, j) - s.expectation_b(2, j)) for j in (1, 2)]
    return 2 + sum(changes, Fraction(0))


def extended_noncontextuality_check(s: CyclicFourSystem) -> ExtendedCheck:
    lhs, bound = chsh_value(s), extended_bound(s)
    return ExtendedCheck(lhs <= bound, lhs, bound)


def is_noncontextual_lp(s: CyclicFourSystem | System) -> bool:
    """Whether the system admits a maximally connected coupling."""
    system = s.system if isinstance(s, CyclicFourSystem) else s
    return maximally_connected_coupling(system) is not None


def selective_influences_check(s: CyclicFourSystem) -> bool:
    """Marginal selectivity together with the CHSH inequality.

    The result is cross-checked against the existence of a coupling in which all measurements
    of every content coincide.

    Raises
    ------
    RuntimeError
        if the two do not agree.
    """
    selective = marginal_selectivity_check(s).holds
    closed_form = selective and chsh_value(s) <= 2
    if selective:
        by_coupling = identity_connected_coupling(s.system) is not None
        if by_coupling != closed_form:
            msg = f"selective influences: closed form says {closed_form}, coupling search says {by_coupling}"
            raise RuntimeError(msg)
    return closed_form


def brute_force_oracle(s: CyclicFourSystem) -> bool:
    """Whether the four bunches are a mixture of the 16 deterministic assignments of ``+1``/``-1`` to
    ``A1, A2, B1, B2``.

    This is a 16-variable feasibility problem, unrelated to the coupling formulation.

    Raises
    ------
    ~couplecheck.errors.RequiresMarginalSelectivity
        if the system is not marginally selective; there are no mixtures then.
    """
    check = marginal_selectivity_check(s)
    if not check.holds:
        msg = f"mixtures of deterministic assignments need marginal selectivity, which fails for {check.detail}"
        raise errors.RequiresMarginalSelectivity(msg)

    strategies = list(itertools.product((PLUS, MINUS), repeat=4))
    matrix, rhs = [], []
    for i, j in _INDICES:
        joint = joint_marginal(s.bunch(i, j), [s.a[i - 1], s.b[j - 1]])
        for x, y in itertools.product((PLUS, MINUS), repeat=2):
            # a strategy is (A1, A2, B1, B2).
            matrix.append(tuple(Fraction(st[i - 1] == x and st[1 + j] == y) for st in strategies))
            rhs.append(joint.get((x, y), Fraction(0)))

    names = tuple(" ".join(st) for st in strategies)
    return solve_feasibility(LinearSystem(tuple(matrix), tuple(rhs), names)).feasible


@dataclass(frozen=True)
class AnalysisReport:
    """All verdicts about one system.

    The closed-form fields are ``None`` for systems that are not 2x2 cyclic, and
    ``brute_force_oracle`` is ``None`` whenever marginal selectivity fails.
    """

    structure: str
    marginal_selectivity: bool
    selectivity_detail: dict[Content, bool]
    noncontextual_lp: bool
    oracle_agreement: bool
    chsh_value: Fraction | None = None
    chsh_satisfied: bool | None = None
    extended_bound: Fraction | None = None
    noncontextual_closed_form: bool | None = None
    selective_influences: bool | None = None
    brute_force_oracle: bool | None = None
    witness: Coupling | None = field(default=None, compare=False, repr=False)
    """a maximally connected coupling, if there is one."""

    @property
    def noncontextual(self) -> bool:
        return self.noncontextual_lp


def analyze(s: CyclicFourSystem) -> AnalysisReport:
    """Run every check on a 2x2 cyclic system and compare the verdicts of the different routes."""
    selectivity = marginal_selectivity_check(s)
    extended = extended_noncontextuality_check(s)
    witness = maximally_connected_coupling(s.system)
    noncontextual_lp = witness is not None
    oracle = brute_force_oracle(s) if selectivity.holds else None

    agreement = extended.noncontextual == noncontextual_lp and oracle in (None, noncontextual_lp)
    if witness is not None:
        agreement = agreement and verify_coupling(witness).ok
    if not agreement:
        log.error(
            "verdicts disagree: closed form %s, coupling %s, mixture oracle %s",
            extended.noncontextual,
            noncontextual_lp,
            oracle,
        )

    report = AnalysisReport(
        structure="cyclic-4",
        marginal_selectivity=selectivity.holds,
        selectivity_detail=selectivity.detail,
        noncontextual_lp=noncontextual_lp,
        oracle_agreement=agreement,
        chsh_value=extended.lhs,
        chsh_satisfied=extended.lhs <= 2,
        extended_bound=extended.bound,
        noncontextual_closed_form=extended.noncontextual,
        # under marginal selectivity the maximal coupling is the identity-connected one, which the
        # agreement above already compares with the closed form.
        selective_influences=selectivity.holds and extended.lhs <= 2,
        brute_force_oracle=oracle,
        witness=witness,
    )
    log.info("CHSH value %s, bound %s: %s", extended.lhs, extended.bound, _verdict(report))
    return report


def analyze_general(system: System) -> AnalysisReport:
    """Analyse a system with shared contents by the coupling route only.

    Raises
    ------
    ~couplecheck.errors.StructuralMismatch
        if no content is measured in more than one context.
    ~couplecheck.errors.ConnectionArityUnsupported
        if some content is measured in more than two contexts.
    """
    if all(len(c.observables) < 2 for c in system.connections()):
        msg = "system has no shared contents across contexts"
        raise errors.StructuralMismatch(msg)

    selectivity = marginal_selectivity_check(system)
    witness = maximally_connected_coupling(system)
    selective = selectivity.holds and identity_connected_coupling(system) is not None
    agreement = witness is None or verify_coupling(witness).ok

    report = AnalysisReport(
        structure="general",
        marginal_selectivity=selectivity.holds,
        selectivity_detail=selectivity.detail,
        noncontextual_lp=witness is not None,
        oracle_agreement=agreement,
        selective_influences=selective,
        witness=witness,
    )
    log.info("coupling route only: %s", _verdict(report))
    return report


def analyze_system(system: System) -> AnalysisReport:
    """:func:`analyze` for 2x2 cyclic systems, :func:`analyze_general` for anything else."""
    try:
        cyclic = CyclicFourSystem.from_system(system)
    except errors.StructuralMismatch as exc:
        log.debug("not a 2x2 cyclic system (%s)", exc)
        return analyze_general(system)
    return analyze(cyclic)


def _verdict(report: AnalysisReport) -> str:
    return "noncontextual" if report.noncontextual else "contextual"
