from __future__ import annotations

from couplecheck._version import version as __version__
from couplecheck.analysis import CyclicFourSystem, analyze, analyze_general, analyze_system
from couplecheck.config import load_config, resolve_config
from couplecheck.coupling import (
    ConnectionTarget,
    Coupling,
    couple_with_equality_targets,
    maximally_connected_coupling,
)
from couplecheck.scenarios import ScenarioId, build
from couplecheck.system import Bunch, Context, Distribution, Observable, System, validate_system
from couplecheck.systemfile import parse_system_file, print_system_file

__all__ = [
    "Bunch",
    "ConnectionTarget",
    "Context",
    "Coupling",
    "CyclicFourSystem",
    "Distribution",
    "Observable",
    "ScenarioId",
    "System",
    "__version__",
    "analyze",
    "analyze_general",
    "analyze_system",
    "build",
    "couple_with_equality_targets",
    "load_config",
    "maximally_connected_coupling",
    "parse_system_file",
    "print_system_file",
    "resolve_config",
    "validate_system",
]
