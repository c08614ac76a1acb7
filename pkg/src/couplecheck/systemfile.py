"""Reading and writing systems as SystemFiles.

A SystemFile is a line-oriented text document made of four kinds of sections::

    # comments start with '#'
    [contents]
    a1 a2 b1 b2

    [contexts]
    a1-b1: a1 b1
    a1-b2: a1 b2

    [supports]
    a1 @ a1-b1: +1 -1

    [bunch a1-b1]
    +1 +1 : 1/2
    -1 -1 : 1/2

Masses are exact fractions ``p/q`` (or integers); decimal literals are rejected. Tuples not
listed in a bunch have mass zero. See :doc:`/systemfile` for the full grammar.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple

from . import errors
from .system import Bunch, Context, Observable, System, Value, format_rational, to_rational

log = logging.getLogger(__name__)

_HEADER = re.compile(r"^\[\s*(contents|contexts|supports|bunch\s+(?P<context>\S+))\s*\]$")
_ID = re.compile(r"^[^\s:@#\[\]]+$")


@dataclass
class SourceMap:
    """Line numbers of the declarations of a parsed SystemFile, used to locate violations."""

    lines: dict[tuple, tuple[str, int]] = field(default_factory=dict)

    def record(self, key: tuple, section: str, line: int) -> None:
        self.lines.setdefault(key, (section, line))

    def locate(self, violation: errors.SystemViolation) -> tuple[str, int] | None:
        """The ``(section, line)`` a violation refers to, if it can be traced back to one."""
        ctx, content, values = violation.context, violation.content, violation.values
        candidates: list[tuple] = []
        if values is not None and ctx is not None:
            candidates.append(("tuple", ctx, values))
        if content is not None and ctx is not None:
            candidates += [("support", content, ctx), ("context", ctx)]
        if ctx is not None:
            if isinstance(violation, errors.MassNotNormalized | errors.UnknownContext | errors.NegativeMass):
                candidates.append(("bunch", ctx))
            candidates += [("context", ctx), ("bunch", ctx)]
        if content is not None:
            candidates.append(("content", content))
        return next((self.lines[k] for k in candidates if k in self.lines), None)


class ParsedSystemFile(NamedTuple):
    """A parsed (but not validated) SystemFile."""

    system: System
    source_map: SourceMap


def _ids(tokens: list[str], line: int, raw: str) -> list[str]:
    for token in tokens:
        if not _ID.match(token):
            msg = f"invalid identifier {token!r}"
            raise errors.ParseError(msg, line, raw.find(token) + 1)
    return tokens


def parse_system_file(text: str) -> ParsedSystemFile:
    """Parse a SystemFile into a system, without validating it.

    Raises
    ------
    ~couplecheck.errors.ParseError
        with line and column of the first syntax error.
    """
    contents: list[str] = []
    contexts: list[Context] = []
    supports: dict[Observable, tuple[Value, ...]] = {}
    joints: dict[str, dict[tuple[Value, ...], Fraction]] = {}
    source_map = SourceMap()

    section: str | None = None
    bunch_id: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue

        if line.startswith("["):
            header = _HEADER.match(line)
            if header is None:
                msg = f"unknown section header {line!r}"
                raise errors.ParseError(msg, lineno, 1)
            section, bunch_id = header.group(1).split()[0], header.group("context")
            if bunch_id is not None:
                if bunch_id in joints:
                    msg = f"second bunch section for context {bunch_id}"
                    raise errors.ParseError(msg, lineno, 1)
                joints[bunch_id] = {}
                source_map.record(("bunch", bunch_id), f"bunch {bunch_id}", lineno)
            continue

        if section is None:
            msg = "content outside of any section"
            raise errors.ParseError(msg, lineno, 1)

        if section == "contents":
            for q in _ids(line.split(), lineno, raw):
                contents.append(q)
                source_map.record(("content", q), "contents", lineno)

        elif section == "contexts":
            context_id, sep, measured = line.partition(":")
            if not sep:
                msg = "expected 'context: content content ...'"
                raise errors.ParseError(msg, lineno, 1)
            (context_id,) = _ids([context_id.strip()], lineno, raw)
            contexts.append(Context(context_id, tuple(_ids(measured.split(), lineno, raw))))
            source_map.record(("context", context_id), "contexts", lineno)

        elif section == "supports":
            observable, sep, values = line.partition(":")
            content, at, context_id = observable.partition("@")
            if not sep or not at:
                msg = "expected 'content @ context: value value ...'"
                raise errors.ParseError(msg, lineno, 1)
            obs = Observable(*_ids([content.strip(), context_id.strip()], lineno, raw))
            if obs in supports:
                msg = f"second support declaration for {obs}"
                raise errors.ParseError(msg, lineno, 1)
            supports[obs] = tuple(_ids(values.split(), lineno, raw))
            source_map.record(("support", obs.content, obs.context), "supports", lineno)

        else:
            values, sep, mass = line.rpartition(":")
            if not sep:
                msg = "expected 'value value ... : p/q'"
                raise errors.ParseError(msg, lineno, 1)
            column = raw.rfind(mass.strip()) + 1
            try:
                p = to_rational(mass.strip())
            except errors.ParseError as exc:
                raise errors.ParseError(str(exc), lineno, column) from None
            key = tuple(_ids(values.split(), lineno, raw))
            if key in joints[bunch_id]:
                msg = f"tuple {' '.join(key)} listed twice"
                raise errors.ParseError(msg, lineno, 1)
            joints[bunch_id][key] = p
            source_map.record(("tuple", bunch_id, key), f"bunch {bunch_id}", lineno)

    by_id = {c.id: c for c in contexts}
    bunches = {c: Bunch(by_id.get(c, Context(c, ())), joint) for c, joint in joints.items()}
    log.debug("parsed %d content(s), %d context(s), %d bunch(es)", len(contents), len(contexts), len(bunches))
    return ParsedSystemFile(System(tuple(contents), tuple(contexts), bunches, supports), source_map)


def read_system_file(path: str | Path) -> ParsedSystemFile:
    return parse_system_file(Path(path).read_text(encoding="utf-8"))


def print_system_file(system: System) -> str:
    """The canonical SystemFile of ``system``.

    Ids and supports are sorted, bunch lines follow the support order and omit zero masses.
    Parsing the output gives back an equal system.
    """
    lines = ["[contents]", " ".join(system.contents), "", "[contexts]"]
    lines += [f"{c.id}: {' '.join(c.measured)}" for c in system.contexts]
    lines += ["", "[supports]"]
    lines += [f"{obs.content} @ {obs.context}: {' '.join(system.support(obs))}" for obs in system.observables()]

    for context in system.contexts:
        supports = [system.support(Observable(q, context.id)) for q in context.measured]

        def order(item: tuple[tuple[Value, ...], Fraction], supports: list = supports) -> tuple[int, ...]:
            return tuple(s.index(v) for s, v in zip(supports, item[0], strict=True))

        lines += ["", f"[bunch {context.id}]"]
        lines += [
            f"{' '.join(values)} : {format_rational(m)}"
            for values, m in sorted(system.bunch(context.id).nonzero().items(), key=order)
        ]
    return "\n".join(lines) + "\n"


def write_system_file(system: System, path: str | Path) -> None:
    Path(path).write_text(print_system_file(system), encoding="utf-8")
    log.info("system written to %s", path)
