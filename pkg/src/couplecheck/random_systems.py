"""Random 2x2 cyclic systems with masses on a rational grid, and the cross-validation sweep.

All masses are multiples of ``1/grid`` and are drawn as integers with a
:class:`numpy.random.Generator`, so the systems themselves are exact.
"""

from __future__ import annotations

import itertools
import logging
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .analysis import CyclicFourSystem, analyze
from .scenarios import PLUS_MINUS, cyclic_system, selective_cyclic_system
from .system import Distribution, System, Value

log = logging.getLogger(__name__)

DEFAULT_GRID = 64
_INDICES = ((1, 1), (1, 2), (2, 1), (2, 2))
_CELLS = (("+1", "+1"), ("+1", "-1"), ("-1", "+1"), ("-1", "-1"))


def random_composition(rng: np.random.Generator, total: int, parts: int) -> list[int]:
    """``parts`` nonnegative integers summing to ``total``, from sorted uniform cut points."""
    cuts = np.sort(rng.integers(0, total + 1, size=parts - 1))
    return np.diff(np.concatenate(([0], cuts, [total]))).tolist()


def random_binary_distribution(
    rng: np.random.Generator, grid: int = DEFAULT_GRID, support: tuple[Value, Value] = PLUS_MINUS
) -> Distribution:
    k = int(rng.integers(0, grid + 1))
    return Distribution(support, (Fraction(k, grid), Fraction(grid - k, grid)))


def random_cyclic_system(rng: np.random.Generator, grid: int = DEFAULT_GRID) -> System:
    """A 2x2 system with the four joint distributions drawn independently of each other.

    Marginal selectivity almost always fails for these.
    """
    joints = {}
    for ij in _INDICES:
        masses = random_composition(rng, grid, 4)
        joints[ij] = {cell: Fraction(m, grid) for cell, m in zip(_CELLS, masses, strict=True)}
    return cyclic_system(joints)


def random_selective_system(rng: np.random.Generator, grid: int = DEFAULT_GRID) -> System:
    """A marginally selective 2x2 system.

    The probabilities ``a_i``, ``b_j`` of ``+1`` are drawn first, then the mass ``x`` of
    ``(+1, +1)`` of every context within its attainable range ``[max(0, a + b - 1), min(a, b)]``.
    """
    a = rng.integers(0, grid + 1, size=2).tolist()
    b = rng.integers(0, grid + 1, size=2).tolist()
    joints = {}
    for i, j in _INDICES:
        ai, bj = a[i - 1], b[j - 1]
        x = int(rng.integers(max(0, ai + bj - grid), min(ai, bj) + 1))
        masses = (x, ai - x, bj - x, grid - ai - bj + x)
        joints[(i, j)] = {cell: Fraction(m, grid) for cell, m in zip(_CELLS, masses, strict=True)}
    return cyclic_system(joints)


def boundary_systems(grid: int = DEFAULT_GRID, limit: int | None = None) -> list[System]:
    """Marginally selective systems whose CHSH value is exactly 2.

    All marginals are uniform, so the product expectations ``E_ij`` are free in ``[-1, 1]`` on a
    grid of step ``4/grid``. Choosing ``E22 = E11 + E12 + E21 - 2`` puts one of the four terms
    exactly at 2; only the choices in which no other term exceeds it are kept.
    """
    step = Fraction(4, grid)
    values = [-1 + k * step for k in range(grid // 2 + 1)]
    systems = []
    for e11, e12, e21 in itertools.product(values, repeat=3):
        e22 = e11 + e12 + e21 - 2
        if not -1 <= e22 <= 1:
            continue
        total = e11 + e12 + e21 + e22
        if max(abs(total - 2 * e) for e in (e11, e12, e21, e22)) != 2:
            continue
        systems.append(selective_cyclic_system({(1, 1): e11, (1, 2): e12, (2, 1): e21, (2, 2): e22}))
        if limit is not None and len(systems) >= limit:
            break
    return systems


class SweepResult(NamedTuple):
    n_systems: int
    """Number of systems analysed."""
    n_selective: int
    """How many of them are marginally selective."""
    n_contextual: int
    """How many of them are contextual."""
    n_boundary: int
    """How many have a CHSH value exactly equal to the bound."""
    disagreements: list[System]
    """The systems for which the different routes gave different verdicts."""


def sweep(
    n_systems: int = 1000,
    seed: int | None = None,
    grid: int = DEFAULT_GRID,
    selective_fraction: Fraction = Fraction(1, 2),
    n_boundary: int = 20,
) -> SweepResult:
    """Analyse random systems (and ``n_boundary`` constructed boundary systems) and count the
    disagreements between the closed-form criterion, the coupling search and, for marginally
    selective systems, the mixture oracle."""
    rng = np.random.default_rng(seed)
    fraction = Fraction(selective_fraction)

    systems = []
    for _ in range(n_systems):
        selective = rng.integers(0, fraction.denominator) < fraction.numerator
        systems.append(random_selective_system(rng, grid) if selective else random_cyclic_system(rng, grid))
    systems += boundary_systems(grid, limit=n_boundary)

    n_selective = n_contextual = n_on_bound = 0
    disagreements = []
    for k, system in enumerate(systems):
        report = analyze(CyclicFourSystem.from_system(system))
        n_selective += report.marginal_selectivity
        n_contextual += not report.noncontextual
        n_on_bound += report.chsh_value == report.extended_bound
        if not report.oracle_agreement:
            disagreements.append(system)
        if (k + 1) % 100 == 0:
            log.info("analysed %d/%d systems, %d disagreement(s)", k + 1, len(systems), len(disagreements))

    return SweepResult(len(systems), n_selective, n_contextual, n_on_bound, disagreements)
