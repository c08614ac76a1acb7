"""Exceptions raised by couplecheck.

Every error is a :class:`ValueError`, so callers that do not care about the details can catch
that. The validation errors describe a single violated invariant and carry the offending
context/content, so that they can be collected and reported together by
:func:`couplecheck.system.validate_system`.
"""

from __future__ import annotations

from collections.abc import Sequence


class CouplecheckError(ValueError):
    """Base class of all errors raised by this package."""


class SystemViolation(CouplecheckError):
    """A violated invariant of a system, a bunch or a distribution.

    Parameters
    ----------
    msg
        human-readable description.
    context
        id of the offending context, if any.
    content
        id of the offending content, if any.
    values
        the offending value tuple of a bunch, if any.
    """

    def __init__(
        self,
        msg: str,
        context: str | None = None,
        content: str | None = None,
        values: tuple[str, ...] | None = None,
    ) -> None:
        super().__init__(msg)
        self.context = context
        self.content = content
        self.values = values

    @property
    def kind(self) -> str:
        return type(self).__name__


class MassNotNormalized(SystemViolation):
    pass


class NegativeMass(SystemViolation):
    pass


class ArityMismatch(SystemViolation):
    pass


class UnknownContent(SystemViolation):
    pass


class DuplicateContext(SystemViolation):
    pass


class DuplicateContent(SystemViolation):
    pass


class DuplicateValue(SystemViolation):
    pass


class MissingSupport(SystemViolation):
    pass


class UnknownValue(SystemViolation):
    pass


class MissingBunch(SystemViolation):
    pass


class UnknownContext(SystemViolation):
    pass


class EmptyContext(SystemViolation):
    pass


class RepeatedContent(SystemViolation):
    pass


class UnusedContent(SystemViolation):
    pass


class InvalidSystemError(CouplecheckError):
    """Raised by :func:`~couplecheck.system.validate_system` with every violation found."""

    def __init__(self, violations: Sequence[SystemViolation]) -> None:
        self.violations = list(violations)
        lines = [f"{v.kind}: {v}" for v in self.violations]
        super().__init__(f"{len(self.violations)} violation(s):\n  " + "\n  ".join(lines))


class ContentNotInContext(CouplecheckError):
    pass


class DimensionMismatch(CouplecheckError):
    pass


class DistributionsDiffer(CouplecheckError):
    """No identity coupling exists, since the distributions to be identified are not equal."""


class NotABijection(CouplecheckError):
    pass


class UnknownConnection(CouplecheckError):
    pass


class ConnectionArityUnsupported(CouplecheckError):
    pass


class NonBinarySupport(CouplecheckError):
    pass


class RequiresMarginalSelectivity(CouplecheckError):
    pass


class UnknownScenario(CouplecheckError):
    pass


class BadParameter(CouplecheckError):
    pass


class StructuralMismatch(CouplecheckError):
    """The system does not have the structure an analysis needs."""


class ParseError(CouplecheckError):
    """A SystemFile (or a value in it) could not be parsed."""

    def __init__(self, msg: str, line: int | None = None, column: int | None = None) -> None:
        self.line = line
        self.column = column
        if line is not None:
            msg = f"line {line}" + (f", column {column}" if column is not None else "") + f": {msg}"
        super().__init__(msg)
