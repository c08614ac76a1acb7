"""Render analysis reports: flat ``key=value`` lines, human-readable text, and YAML documents.

Every probability is printed as a reduced fraction ``p/q``, never as a floating-point number,
and keys always come in the same order.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from fractions import Fraction
from pathlib import Path
from typing import Any

import yaml

from . import _version
from .analysis import AnalysisReport
from .coupling import Coupling
from .system import format_rational

log = logging.getLogger(__name__)

NOT_APPLICABLE = "n/a"


def _plain(value: Any) -> Any:
    if value is None:
        return NOT_APPLICABLE
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return format_rational(value)
    return value


def report_items(report: AnalysisReport) -> list[tuple[str, str]]:
    """The ``(key, value)`` pairs of a report in canonical order."""
    items = [("structure", report.structure), ("marginal_selectivity", report.marginal_selectivity)]
    items += [(f"marginal_selectivity.{q}", ok) for q, ok in report.selectivity_detail.items()]
    items += [
        ("chsh_value", report.chsh_value),
        ("chsh_satisfied", report.chsh_satisfied),
        ("extended_bound", report.extended_bound),
        ("noncontextual_closed_form", report.noncontextual_closed_form),
        ("noncontextual_lp", report.noncontextual_lp),
        ("selective_influences", report.selective_influences),
        ("brute_force_oracle", report.brute_force_oracle),
        ("oracle_agreement", report.oracle_agreement),
        ("noncontextual", report.noncontextual),
    ]
    return [(key, str(_plain(value))) for key, value in items]


def format_machine(report: AnalysisReport, source: str | None = None) -> str:
    """One ``key=value`` line per report field, preceded by ``file=<source>`` if given."""
    lines = [] if source is None else [f"file={source}"]
    lines += [f"{key}={value}" for key, value in report_items(report)]
    return "\n".join(lines)


def format_text(report: AnalysisReport, source: str | None = None) -> str:
    lines = [] if source is None else [f"{source}:"]
    verdict = "noncontextual" if report.noncontextual else "contextual"
    lines.append(f"  verdict: {verdict} ({report.structure} system)")

    inconsistent = [q for q, ok in report.selectivity_detail.items() if not ok]
    if report.marginal_selectivity:
        lines.append("  marginal selectivity: holds")
    else:
        lines.append(f"  marginal selectivity: violated for {', '.join(inconsistent)}")

    if report.chsh_value is not None:
        relation = "<=" if report.chsh_value <= report.extended_bound else ">"
        lines.append(
            f"  CHSH value {format_rational(report.chsh_value)} {relation} "
            f"bound {format_rational(report.extended_bound)}"
        )
    lines.append(f"  maximally connected coupling: {'found' if report.noncontextual_lp else 'none'}")
    if report.selective_influences is not None:
        lines.append(f"  selective influences: {'yes' if report.selective_influences else 'no'}")
    if report.brute_force_oracle is not None:
        lines.append(f"  mixture of deterministic assignments: {'yes' if report.brute_force_oracle else 'no'}")
    if not report.oracle_agreement:
        lines.append("  WARNING: the verdicts of the different routes disagree")
    return "\n".join(lines)


def coupling_lines(coupling: Coupling) -> list[str]:
    """The atoms with nonzero mass as ``value value ... : p/q``, in canonical order."""
    return [f"{' '.join(values)} : {format_rational(m)}" for values, m in coupling.sorted_atoms()]


def generate_report(report: AnalysisReport, source: str | None = None) -> dict[str, Any]:
    """A nested, YAML-serializable document of one report, including the coupling witness."""
    document: dict[str, Any] = {"source": source}
    document.update(report_items(report))
    if report.witness is not None:
        document["witness"] = {
            "observables": [str(obs) for obs in report.witness.observables],
            "atoms": coupling_lines(report.witness),
        }
    return document


def write_report(reports: Mapping[str, AnalysisReport], filename: str | Path) -> None:
    """Write the reports of several systems, keyed by their source file, to ``filename`` as YAML."""
    document = {
        "metadata": {"package_version": _version.__version__, "n_systems": len(reports)},
        "systems": [generate_report(report, source) for source, report in reports.items()],
    }

    with Path(filename).open("w") as f:
        yaml.safe_dump(document, f, sort_keys=False, default_flow_style=False)

    n_contextual = sum(not r.noncontextual for r in reports.values())
    log.info("wrote report of %d system(s) (%d contextual) to %s", len(reports), n_contextual, filename)
